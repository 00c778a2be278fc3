#include "cyclesync/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cyclesync/errors.hpp"

namespace cyclesync {

namespace {

void check_channel_finite(const std::vector<double>& values, const char* name,
                          int cycle_id) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(errc::non_finite_value, "cycle " + std::to_string(cycle_id) +
                                       " has non-finite " + name +
                                       " at tick " + std::to_string(i));
    }
  }
}

}  // namespace

const CycleRecord& BatteryDataset::cycle_by_id(int cycle_id) const {
  for (const CycleRecord& c : cycles) {
    if (c.cycle_id == cycle_id) return c;
  }
  fail(errc::unknown_reference_id,
       "no cycle with id " + std::to_string(cycle_id) + " in dataset '" +
           battery_id + "'");
}

void validate_cycle(const CycleRecord& cycle) {
  const std::string id = std::to_string(cycle.cycle_id);
  if (cycle.cycle_id < 1) {
    fail(errc::non_contiguous_cycle_ids, "cycle id " + id + " must be >= 1");
  }
  const std::size_t n = cycle.voltage_v.size();
  if (n < 2) {
    fail(errc::channel_length_mismatch,
         "cycle " + id + " has " + std::to_string(n) + " ticks, need >= 2");
  }
  if (cycle.temperature_c.size() != n || cycle.current_a.size() != n) {
    fail(errc::channel_length_mismatch,
         "cycle " + id + " channel lengths differ: T=" +
             std::to_string(cycle.temperature_c.size()) +
             " I=" + std::to_string(cycle.current_a.size()) +
             " V=" + std::to_string(n));
  }
  check_channel_finite(cycle.temperature_c, "temperature", cycle.cycle_id);
  check_channel_finite(cycle.current_a, "current", cycle.cycle_id);
  check_channel_finite(cycle.voltage_v, "voltage", cycle.cycle_id);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = cycle.voltage_v[i];
    if (v < kVoltageMinV || v > kVoltageMaxV) {
      fail(errc::value_out_of_range,
           "cycle " + id + " voltage " + std::to_string(v) + " at tick " +
               std::to_string(i) + " outside [0, 10] V");
    }
  }
  if (!(cycle.capacity_ah > 0.0) || !std::isfinite(cycle.capacity_ah)) {
    fail(errc::value_out_of_range,
         "cycle " + id + " capacity must be positive, got " +
             std::to_string(cycle.capacity_ah));
  }
}

void validate_dataset(const BatteryDataset& dataset) {
  if (dataset.cycles.empty()) {
    fail(errc::empty_dataset, "dataset '" + dataset.battery_id + "' is empty");
  }
  if (dataset.cycles.size() < 3) {
    fail(errc::too_few_cycles,
         "dataset '" + dataset.battery_id + "' has " +
             std::to_string(dataset.cycles.size()) +
             " cycles, need at least 3 (reference + train + test)");
  }
  int expected = 1;
  for (const CycleRecord& cycle : dataset.cycles) {
    if (cycle.cycle_id != expected) {
      fail(errc::non_contiguous_cycle_ids,
           "expected cycle id " + std::to_string(expected) + ", found " +
               std::to_string(cycle.cycle_id));
    }
    validate_cycle(cycle);
    ++expected;
  }
}

std::size_t min_cycle_length(const BatteryDataset& dataset) {
  if (dataset.cycles.empty()) {
    fail(errc::empty_dataset, "cannot take min length of empty dataset");
  }
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (const CycleRecord& c : dataset.cycles) best = std::min(best, c.length());
  return best;
}

std::size_t max_cycle_length(const BatteryDataset& dataset) {
  if (dataset.cycles.empty()) {
    fail(errc::empty_dataset, "cannot take max length of empty dataset");
  }
  std::size_t best = 0;
  for (const CycleRecord& c : dataset.cycles) best = std::max(best, c.length());
  return best;
}

}  // namespace cyclesync
