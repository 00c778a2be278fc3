#include "cyclesync/adam.hpp"

#include <cmath>

#include "cyclesync/errors.hpp"

namespace cyclesync {

AdamState::AdamState(Eigen::Index parameter_count, const AdamConfig& cfg)
    : m(Vector::Zero(parameter_count)),
      v(Vector::Zero(parameter_count)),
      step(0),
      config(cfg) {
  if (parameter_count <= 0) {
    fail(errc::invalid_config, "optimizer needs a positive parameter count");
  }
  if (!(cfg.learning_rate >= 0.0)) {
    fail(errc::invalid_config, "learning rate must be non-negative");
  }
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    fail(errc::invalid_config, "Adam betas must lie in [0, 1)");
  }
  if (!(cfg.epsilon > 0.0)) {
    fail(errc::invalid_config, "Adam epsilon must be positive");
  }
}

void adam_step(Vector& params, const Vector& grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    fail(errc::shape_mismatch, "optimizer state does not match parameter size");
  }
  const AdamConfig& c = state.config;
  ++state.step;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * grads;
  state.v = c.beta2 * state.v.array().matrix() +
            (1.0 - c.beta2) * grads.array().square().matrix();
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  // Epsilon sits outside the square root, so the very first step moves each
  // coordinate by almost exactly the learning rate.
  params.array() -= c.learning_rate * (state.m.array() / bc1) /
                    ((state.v.array() / bc2).sqrt() + c.epsilon);
}

}  // namespace cyclesync
