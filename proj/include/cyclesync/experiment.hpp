#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cyclesync/dataset.hpp"
#include "cyclesync/sync.hpp"
#include "cyclesync/train.hpp"

namespace cyclesync {

struct SplitSpec {
  double train_fraction = 0.7;
  bool chronological = true;  // false shuffles membership with `seed`
};

// Index sets for the two halves. Chronological keeps the first
// floor(fraction * n) cycles for training; both halves must be non-empty.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_train_test(
    std::size_t n_cycles, const SplitSpec& spec, std::uint64_t seed = 0);

// Keep the final `target_len` ticks of each channel so the end-of-discharge
// knee is preserved. Features are raw channel values; callers scale them.
ModelInput truncate_cycle(const CycleRecord& cycle, std::size_t target_len);

// Per-column min-max statistics, fitted on training inputs only.
struct ChannelScaler {
  std::array<double, 3> min{};
  std::array<double, 3> max{};
};

ChannelScaler fit_scaler(std::span<const ModelInput> inputs);
void apply_scaler(const ChannelScaler& scaler, ModelInput& input);

// Signed percentage change of the synchronized arm's error relative to the
// truncation arm's. Negative means the synchronized arm is better.
double improvement_percent(double rmse_synced, double rmse_truncated);

struct ExperimentConfig {
  SyncConfig sync;
  ReferencePolicy reference = ReferencePolicy::first_cycle;
  int reference_cycle_id = 0;  // > 0 overrides the policy; must be a train cycle
  SplitSpec split;
  TrainConfig train;
  ModelSizes sizes;
  std::size_t truncate_len = 0;  // 0 picks the dataset's shortest cycle
  bool include_timestamp = true;
};

struct PredictionRow {
  int cycle_id = 0;
  double truth_ah = 0.0;
  double pred_dtw_ah = 0.0;
  double pred_manual_ah = 0.0;
};

struct ExperimentReport {
  std::string battery_id;
  std::size_t n_cycles = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  int reference_cycle_id = 0;
  std::size_t aligned_rows = 0;
  std::size_t truncate_len = 0;
  double rmse_dtw_train = 0.0;
  double rmse_dtw_test = 0.0;
  double rmse_manual_train = 0.0;
  double rmse_manual_test = 0.0;
  double improvement_pct = 0.0;
  int best_epoch_dtw = -1;
  int best_epoch_manual = -1;
  std::vector<PredictionRow> rows;  // test cycles, ordered by cycle_id
  ExperimentConfig config;
  std::string timestamp;  // RFC 3339 UTC, empty when disabled
};

// Train both arms from identical seeds and configs on the same split and
// score them on the held-out cycles.
ExperimentReport run_experiment(const BatteryDataset& dataset,
                                const ExperimentConfig& config);

std::string report_to_json(const ExperimentReport& report);
void write_report_json(const ExperimentReport& report, const std::string& path);

// Columns: cycle_id,truth_Ah,pred_dtw_Ah,pred_manual_Ah.
void write_predictions_csv(const ExperimentReport& report,
                           const std::string& path);

}  // namespace cyclesync
