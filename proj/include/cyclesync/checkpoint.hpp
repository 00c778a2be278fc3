#pragma once

#include <string>
#include <vector>

#include "cyclesync/nn.hpp"

namespace cyclesync {

// Everything needed to apply a trained model to new cycles: the weights
// plus the reference channels and scaling convention the features were
// built against.
struct SyncMetadata {
  std::string battery_id;
  int reference_cycle_id = 0;
  int rows = 0;  // aligned length M every input must match
  bool scale_features = true;
  int radius = 10;
  std::vector<double> reference_temperature_c;
  std::vector<double> reference_current_a;
  std::vector<double> reference_voltage_v;
};

struct Checkpoint {
  LstmModel model;
  SyncMetadata meta;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cyclesync
