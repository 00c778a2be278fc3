#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cyclesync {

// One logged discharge cycle. The three channels are sampled on the same
// tick grid (nominally 10 s apart); `capacity_ah` is the measured discharge
// capacity used as the ground-truth label for the whole cycle.
struct CycleRecord {
  int cycle_id = 0;
  std::vector<double> temperature_c;
  std::vector<double> current_a;
  std::vector<double> voltage_v;
  double capacity_ah = 0.0;

  std::size_t length() const { return voltage_v.size(); }
};

struct BatteryDataset {
  std::string battery_id;
  std::vector<CycleRecord> cycles;  // ordered by cycle_id, contiguous from 1
  double rated_capacity_ah = 0.0;   // optional metadata, 0 when unknown

  std::size_t size() const { return cycles.size(); }
  const CycleRecord& cycle_by_id(int cycle_id) const;
};

// Sanity band for the voltage channel, volts.
inline constexpr double kVoltageMinV = 0.0;
inline constexpr double kVoltageMaxV = 10.0;

// Throw Error on the first violated CycleRecord invariant
// (length >= 2, equal channel lengths, finite values, voltage band,
// positive capacity). Messages name the offending cycle.
void validate_cycle(const CycleRecord& cycle);

// Full dataset validation: every cycle valid, ids contiguous from 1,
// at least 3 cycles.
void validate_dataset(const BatteryDataset& dataset);

std::size_t min_cycle_length(const BatteryDataset& dataset);
std::size_t max_cycle_length(const BatteryDataset& dataset);

}  // namespace cyclesync
