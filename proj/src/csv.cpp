#include "cyclesync/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "cyclesync/errors.hpp"

namespace cyclesync {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_double(const std::string& text, const char* column, long row) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    fail(errc::malformed_row, "row " + std::to_string(row) +
                                  ": cannot parse " + column + " value '" +
                                  text + "'");
  }
  return value;
}

long parse_long(const std::string& text, const char* column, long row) {
  errno = 0;
  char* end = nullptr;
  const long value = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    fail(errc::malformed_row, "row " + std::to_string(row) +
                                  ": cannot parse " + column + " value '" +
                                  text + "'");
  }
  return value;
}

std::size_t column_index(const std::vector<std::string>& header,
                         const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  fail(errc::missing_column, "header lacks column '" + name + "'");
}

}  // namespace

BatteryDataset load_dataset(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    fail(errc::io_error, "cannot open '" + path + "' for reading");
  }

  std::string line;
  if (!std::getline(in, line)) {
    fail(errc::missing_column, "file '" + path + "' has no header row");
  }
  const std::vector<std::string> header = split_line(strip_cr(line));
  const std::size_t col_cycle = column_index(header, schema.cycle_id);
  const std::size_t col_tick = column_index(header, schema.tick_index);
  const std::size_t col_temp = column_index(header, schema.temperature);
  const std::size_t col_curr = column_index(header, schema.current);
  const std::size_t col_volt = column_index(header, schema.voltage);
  const std::size_t col_cap = column_index(header, schema.capacity);

  BatteryDataset dataset;
  dataset.battery_id = std::filesystem::path(path).stem().string();

  CycleRecord current;
  bool have_cycle = false;
  long row = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() < header.size()) {
      fail(errc::malformed_row, "row " + std::to_string(row) + ": expected " +
                                    std::to_string(header.size()) +
                                    " fields, found " +
                                    std::to_string(fields.size()));
    }
    const long cycle_id = parse_long(fields[col_cycle], "cycle_id", row);
    const long tick = parse_long(fields[col_tick], "tick_index", row);
    const double temp = parse_double(fields[col_temp], "temperature", row);
    const double curr = parse_double(fields[col_curr], "current", row);
    const double volt = parse_double(fields[col_volt], "voltage", row);
    const double cap = parse_double(fields[col_cap], "capacity", row);

    if (!have_cycle || cycle_id != current.cycle_id) {
      if (have_cycle) dataset.cycles.push_back(std::move(current));
      current = CycleRecord{};
      current.cycle_id = static_cast<int>(cycle_id);
      current.capacity_ah = cap;
      have_cycle = true;
    }
    if (tick != static_cast<long>(current.length())) {
      fail(errc::malformed_row,
           "row " + std::to_string(row) + ": cycle " +
               std::to_string(cycle_id) + " expects tick_index " +
               std::to_string(current.length()) + ", found " +
               std::to_string(tick));
    }
    if (cap != current.capacity_ah) {
      fail(errc::malformed_row,
           "row " + std::to_string(row) + ": cycle " +
               std::to_string(cycle_id) + " repeats capacity " +
               std::to_string(current.capacity_ah) + " but row carries " +
               std::to_string(cap));
    }
    current.temperature_c.push_back(temp);
    current.current_a.push_back(curr);
    current.voltage_v.push_back(volt);
  }
  if (have_cycle) dataset.cycles.push_back(std::move(current));

  validate_dataset(dataset);
  return dataset;
}

void write_dataset(const BatteryDataset& dataset, const std::string& path,
                   const CsvSchema& schema) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF on all hosts
  if (!out) {
    fail(errc::io_error, "cannot open '" + path + "' for writing");
  }
  out << schema.cycle_id << ',' << schema.tick_index << ','
      << schema.temperature << ',' << schema.current << ',' << schema.voltage
      << ',' << schema.capacity << '\n';
  char buf[160];
  for (const CycleRecord& cycle : dataset.cycles) {
    for (std::size_t t = 0; t < cycle.length(); ++t) {
      std::snprintf(buf, sizeof(buf), "%d,%zu,%.6f,%.6f,%.6f,%.6f\n",
                    cycle.cycle_id, t, cycle.temperature_c[t],
                    cycle.current_a[t], cycle.voltage_v[t], cycle.capacity_ah);
      out << buf;
    }
  }
  if (!out) {
    fail(errc::io_error, "short write to '" + path + "'");
  }
}

}  // namespace cyclesync
