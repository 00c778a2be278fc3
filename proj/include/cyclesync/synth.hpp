#pragma once

#include <cstdint>

#include "cyclesync/dataset.hpp"

namespace cyclesync {

// Seeded generator of degradation-shaped cycle logs for tests and demos.
// Capacity fades by `fade_rate` per cycle (jittered), occasionally
// regenerating; each cycle's tick count is proportional to its capacity, so
// later cycles are shorter and regeneration cycles grow back.
struct SynthConfig {
  int cycles = 100;
  double initial_capacity_ah = 1.86;
  int base_length = 120;          // ticks of cycle 1 (full capacity)
  double fade_rate = 0.005;       // relative capacity loss per cycle
  double fade_jitter = 0.25;      // relative jitter applied to fade_rate
  double regen_probability = 0.05;
  double regen_gain = 0.015;      // relative capacity recovery when it fires

  double voltage_ceiling_v = 4.2;
  double voltage_cutoff_v = 2.5;
  double discharge_current_a = 2.0;
  double ambient_temp_c = 24.0;
  double temp_rise_c = 14.0;

  double noise_volt_v = 0.01;     // additive uniform noise amplitudes
  double noise_current_a = 0.01;
  double noise_temp_c = 0.15;
};

// Deterministic for a fixed (config, seed); all emitted values are quantized
// to 1e-6 so the canonical CSV writer round-trips exactly.
BatteryDataset generate_synthetic(const SynthConfig& config,
                                  std::uint64_t seed);

}  // namespace cyclesync
