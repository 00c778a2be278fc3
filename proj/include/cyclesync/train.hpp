#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cyclesync/adam.hpp"
#include "cyclesync/nn.hpp"
#include "cyclesync/sync.hpp"

namespace cyclesync {

// How a feature matrix was produced. Experiments that mix the two arms
// assert on this before training so a baseline run can never silently
// consume warped features or vice versa.
enum class Provenance { synchronized_indexes, truncated_raw };

struct ModelInput {
  int cycle_id = 0;
  Matrix features;  // rows x 3, one row per aligned tick
  double capacity_ah = 0.0;
  Provenance provenance = Provenance::synchronized_indexes;
};

ModelInput to_model_input(const SyncedCycle& cycle);

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 1e-3;
  std::uint64_t seed = 42;
  bool shuffle = true;
  double clip_norm = 5.0;  // <= 0 disables clipping
};

struct TrainResult {
  std::vector<double> loss_history;  // training RMSE after each epoch
  int best_epoch = -1;               // epoch index with the lowest RMSE
  double best_rmse = 0.0;
};

// Fits the model in place with per-sample Adam updates. All inputs must
// share one row count and provenance. The model is left at the parameters
// of the best epoch, not the last one.
TrainResult train(LstmModel& model, std::span<const ModelInput> inputs,
                  const TrainConfig& config);

double predict(const LstmModel& model, const ModelInput& input);

}  // namespace cyclesync
