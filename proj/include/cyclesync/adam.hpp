#pragma once

#include "cyclesync/nn.hpp"

namespace cyclesync {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Vector m;  // first-moment accumulator
  Vector v;  // second-moment accumulator
  long step = 0;
  AdamConfig config;

  AdamState() = default;
  AdamState(Eigen::Index parameter_count, const AdamConfig& cfg);
};

// Standard bias-corrected update, applied in place to `params`.
void adam_step(Vector& params, const Vector& grads, AdamState& state);

}  // namespace cyclesync
