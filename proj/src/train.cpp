#include "cyclesync/train.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "cyclesync/errors.hpp"
#include "cyclesync/rng.hpp"

namespace cyclesync {

namespace {

void check_inputs(const LstmModel& model, std::span<const ModelInput> inputs) {
  if (inputs.empty()) {
    fail(errc::empty_input, "training set is empty");
  }
  const Eigen::Index rows = inputs.front().features.rows();
  const Provenance prov = inputs.front().provenance;
  for (const ModelInput& in : inputs) {
    if (in.features.cols() != static_cast<Eigen::Index>(model.sizes().input)) {
      fail(errc::shape_mismatch,
           "cycle " + std::to_string(in.cycle_id) + " has " +
               std::to_string(in.features.cols()) + " feature columns, model expects " +
               std::to_string(model.sizes().input));
    }
    if (in.features.rows() != rows) {
      fail(errc::shape_mismatch,
           "cycle " + std::to_string(in.cycle_id) + " has " +
               std::to_string(in.features.rows()) + " rows, expected " +
               std::to_string(rows) + "; synchronize or truncate first");
    }
    if (in.provenance != prov) {
      fail(errc::invalid_config,
           "training set mixes synchronized and truncated features");
    }
    if (!in.features.allFinite() || !std::isfinite(in.capacity_ah)) {
      fail(errc::non_finite_value,
           "cycle " + std::to_string(in.cycle_id) + " contains a non-finite value");
    }
  }
}

double dataset_rmse(const LstmModel& model, std::span<const ModelInput> inputs) {
  double sq = 0.0;
  for (const ModelInput& in : inputs) {
    const double e = forward(model, in.features) - in.capacity_ah;
    sq += e * e;
  }
  return std::sqrt(sq / static_cast<double>(inputs.size()));
}

}  // namespace

ModelInput to_model_input(const SyncedCycle& cycle) {
  ModelInput input;
  input.cycle_id = cycle.cycle_id;
  input.features = cycle.feature_matrix;
  input.capacity_ah = cycle.capacity_ah;
  input.provenance = Provenance::synchronized_indexes;
  return input;
}

TrainResult train(LstmModel& model, std::span<const ModelInput> inputs,
                  const TrainConfig& config) {
  if (config.epochs <= 0) {
    fail(errc::invalid_config, "epochs must be positive");
  }
  if (!(config.learning_rate >= 0.0)) {
    fail(errc::invalid_config, "learning rate must be non-negative");
  }
  check_inputs(model, inputs);

  AdamConfig adam_cfg;
  adam_cfg.learning_rate = config.learning_rate;
  Vector params = model.flatten();
  AdamState opt(params.size(), adam_cfg);
  std::mt19937_64 rng(config.seed);

  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.loss_history.reserve(static_cast<std::size_t>(config.epochs));
  Vector best_params = params;

  ModelGrads grads = zeros_like(model);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) {
      shuffle_in_place(order, rng);
    }
    for (std::size_t idx : order) {
      const ModelInput& in = inputs[idx];
      ForwardCache cache;
      double pred;
      try {
        pred = forward_cached(model, in.features, cache);
      } catch (const Error& err) {
        if (err.code() == errc::non_finite_activation) {
          fail(errc::non_finite_activation,
               "epoch " + std::to_string(epoch) + " cycle " +
                   std::to_string(in.cycle_id) + ": " + err.what());
        }
        throw;
      }
      // Squared-error gradient per sample; it shares the RMSE minimizer.
      const double dLdy = pred - in.capacity_ah;
      for_each_tensor(grads, [](auto& t) { t.setZero(); });
      backward_from_output(model, cache, dLdy, grads);
      Vector flat_grads = grads.flatten();
      clip_gradients(flat_grads, config.clip_norm);
      adam_step(params, flat_grads, opt);
      model.unflatten(params);
    }
    const double rmse = dataset_rmse(model, inputs);
    result.loss_history.push_back(rmse);
    if (result.best_epoch < 0 || rmse < result.best_rmse) {
      result.best_epoch = epoch;
      result.best_rmse = rmse;
      best_params = params;
    }
  }

  model.unflatten(best_params);
  return result;
}

double predict(const LstmModel& model, const ModelInput& input) {
  return forward(model, input.features);
}

}  // namespace cyclesync
