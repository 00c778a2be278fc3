#pragma once

#include <string>

#include "cyclesync/dataset.hpp"

namespace cyclesync {

// Column names of the flat cycle-log layout. Columns are located by header
// name, so extra columns and arbitrary ordering are accepted.
struct CsvSchema {
  std::string cycle_id = "cycle_id";
  std::string tick_index = "tick_index";
  std::string temperature = "temperature_C";
  std::string current = "current_A";
  std::string voltage = "voltage_V";
  std::string capacity = "capacity_Ah";
};

// Read and validate a dataset. Rows must be sorted by (cycle_id, tick_index)
// with tick_index contiguous from 0 inside each cycle; the capacity column
// repeats the cycle label on every row. battery_id defaults to the file stem.
BatteryDataset load_dataset(const std::string& path,
                            const CsvSchema& schema = {});

// Canonical writer: header row, LF line endings, %.6f for all numeric
// values except cycle_id/tick_index. load_dataset(write_dataset(d)) == d
// whenever d's values carry at most 6 decimals (the synthetic generator
// quantizes accordingly).
void write_dataset(const BatteryDataset& dataset, const std::string& path,
                   const CsvSchema& schema = {});

}  // namespace cyclesync
