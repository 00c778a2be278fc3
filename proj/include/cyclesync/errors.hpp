#pragma once

#include <stdexcept>
#include <string>

namespace cyclesync {

// Error categories used across the library. The C API maps these onto its
// coarser status codes, so keep the enumerator -> category mapping in
// capi.cpp in sync when adding entries.
enum class errc {
  // ingest / dataset
  io_error,
  missing_column,
  malformed_row,
  non_contiguous_cycle_ids,
  channel_length_mismatch,
  non_finite_value,
  value_out_of_range,
  too_few_cycles,
  invalid_config,
  // dtw
  empty_series,
  // sync
  empty_dataset,
  unknown_reference_id,
  // nn
  shape_mismatch,
  non_finite_activation,
  length_mismatch,
  empty_input,
  bad_checkpoint,
  // pipeline
  degenerate_split,
  cycle_shorter_than_target,
  division_by_zero,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cyclesync
