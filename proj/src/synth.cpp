#include "cyclesync/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cyclesync/errors.hpp"
#include "cyclesync/rng.hpp"

namespace cyclesync {

namespace {

double quantize6(double x) { return std::round(x * 1e6) / 1e6; }

void check_config(const SynthConfig& c) {
  if (c.cycles < 3) {
    fail(errc::invalid_config,
         "cycles must be >= 3, got " + std::to_string(c.cycles));
  }
  if (!(c.initial_capacity_ah > 0.0)) {
    fail(errc::invalid_config, "initial_capacity_ah must be positive");
  }
  if (c.base_length < 2) {
    fail(errc::invalid_config, "base_length must be >= 2");
  }
  if (c.fade_rate < 0.0 || c.fade_rate >= 1.0) {
    fail(errc::invalid_config, "fade_rate must lie in [0, 1)");
  }
  if (c.fade_jitter < 0.0 || c.fade_jitter >= 1.0) {
    fail(errc::invalid_config, "fade_jitter must lie in [0, 1)");
  }
  if (c.regen_probability < 0.0 || c.regen_probability > 1.0) {
    fail(errc::invalid_config, "regen_probability must lie in [0, 1]");
  }
  if (c.regen_gain < 0.0) {
    fail(errc::invalid_config, "regen_gain must be >= 0");
  }
  if (!(c.voltage_ceiling_v > c.voltage_cutoff_v)) {
    fail(errc::invalid_config, "voltage ceiling must exceed cutoff");
  }
}

CycleRecord make_cycle(const SynthConfig& c, int cycle_id, double capacity_ah,
                       int length, std::mt19937_64& rng) {
  CycleRecord cycle;
  cycle.cycle_id = cycle_id;
  cycle.capacity_ah = quantize6(capacity_ah);
  cycle.temperature_c.reserve(length);
  cycle.current_a.reserve(length);
  cycle.voltage_v.reserve(length);

  const double v_span = c.voltage_ceiling_v - c.voltage_cutoff_v;
  for (int t = 0; t < length; ++t) {
    const double u = static_cast<double>(t) / (length - 1);
    // Plateau early, knee toward the cutoff at the end of discharge.
    const double volt = c.voltage_cutoff_v + v_span * std::pow(1.0 - u, 0.7) +
                        uniform(rng, -c.noise_volt_v, c.noise_volt_v);
    const double curr = c.discharge_current_a +
                        uniform(rng, -c.noise_current_a, c.noise_current_a);
    // Warms through the discharge, peaking late, then relaxing.
    const double bump = std::exp(-std::pow(u - 0.75, 2) / (2.0 * 0.22 * 0.22));
    const double temp = c.ambient_temp_c + c.temp_rise_c * bump +
                        uniform(rng, -c.noise_temp_c, c.noise_temp_c);
    cycle.voltage_v.push_back(quantize6(volt));
    cycle.current_a.push_back(quantize6(curr));
    cycle.temperature_c.push_back(quantize6(temp));
  }
  return cycle;
}

}  // namespace

BatteryDataset generate_synthetic(const SynthConfig& config,
                                  std::uint64_t seed) {
  check_config(config);
  std::mt19937_64 rng(seed);

  BatteryDataset dataset;
  dataset.battery_id = "synth-" + std::to_string(seed);
  dataset.rated_capacity_ah = config.initial_capacity_ah;

  double capacity = config.initial_capacity_ah;
  for (int k = 1; k <= config.cycles; ++k) {
    if (k > 1) {
      const bool regen = uniform01(rng) < config.regen_probability;
      if (regen) {
        capacity *= 1.0 + config.regen_gain * (0.5 + 0.5 * uniform01(rng));
      } else {
        const double jitter = config.fade_jitter * uniform(rng, -1.0, 1.0);
        capacity *= 1.0 - config.fade_rate * (1.0 + jitter);
      }
    }
    const double label = quantize6(capacity);
    const double ratio = label / config.initial_capacity_ah;
    const int length = std::max(
        2, static_cast<int>(std::lround(config.base_length * ratio)));
    dataset.cycles.push_back(make_cycle(config, k, label, length, rng));
  }

  validate_dataset(dataset);
  return dataset;
}

}  // namespace cyclesync
