#include "cyclesync/errors.hpp"

namespace cyclesync {

const char* errc_name(errc code) {
  switch (code) {
    case errc::io_error: return "IoError";
    case errc::missing_column: return "MissingColumn";
    case errc::malformed_row: return "MalformedRow";
    case errc::non_contiguous_cycle_ids: return "NonContiguousCycleIds";
    case errc::channel_length_mismatch: return "ChannelLengthMismatch";
    case errc::non_finite_value: return "NonFiniteValue";
    case errc::value_out_of_range: return "ValueOutOfRange";
    case errc::too_few_cycles: return "TooFewCycles";
    case errc::invalid_config: return "InvalidConfig";
    case errc::empty_series: return "EmptySeries";
    case errc::empty_dataset: return "EmptyDataset";
    case errc::unknown_reference_id: return "UnknownReferenceId";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::non_finite_activation: return "NonFiniteActivation";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::empty_input: return "EmptyInput";
    case errc::bad_checkpoint: return "BadCheckpoint";
    case errc::degenerate_split: return "DegenerateSplit";
    case errc::cycle_shorter_than_target: return "CycleShorterThanTarget";
    case errc::division_by_zero: return "DivisionByZero";
  }
  return "UnknownError";
}

}  // namespace cyclesync
