#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "cyclesync/dataset.hpp"
#include "cyclesync/dtw.hpp"

namespace cyclesync {

enum class ChannelTag { temperature, current, voltage };

const char* channel_tag_name(ChannelTag tag);

// A sample cycle re-expressed on the reference cycle's index axis: slot k_r
// holds the (possibly averaged, hence fractional) sample tick index aligned
// to it. Values are non-decreasing with endpoints 0 and N-1.
struct SyncedChannel {
  std::vector<double> values;
  ChannelTag tag = ChannelTag::temperature;
};

// The three synchronized channels of one cycle plus the M x 3 model input
// built from them (columns T', I', V'). With scale_features the matrix
// columns are the channel values divided by M-1 so they lie in [0,1];
// without it they equal the channel values exactly.
struct SyncedCycle {
  int cycle_id = 0;
  std::array<SyncedChannel, 3> channels;
  Eigen::MatrixXd feature_matrix;
  double capacity_ah = 0.0;
};

enum class ReferencePolicy { first_cycle, longest_cycle };

struct SyncConfig {
  FastDtwConfig dtw;
  bool scale_features = true;
};

// first_cycle returns the dataset's first cycle id; longest_cycle returns
// the id of the longest cycle, smallest id on ties.
int select_reference(const BatteryDataset& dataset, ReferencePolicy policy);

// Group the path's sample indexes by reference index and take the
// arithmetic mean of each group, then pin slot 0 to 0 and slot M-1 to N-1
// (the path's own endpoints). Non-decreasing by construction.
std::vector<double> aggregate_sample_indexes(const WarpPath& path,
                                             std::size_t ref_len,
                                             std::size_t sample_len);

SyncedChannel synchronize_channel(std::span<const double> reference,
                                  std::span<const double> sample,
                                  ChannelTag tag, const FastDtwConfig& cfg);

// Three independent per-channel alignments; the sample's capacity label is
// carried through untouched.
SyncedCycle synchronize_cycle(const CycleRecord& reference_cycle,
                              const CycleRecord& sample_cycle,
                              const SyncConfig& cfg);

// Synchronize every cycle (including the reference itself, which maps to
// the identity columns 0..M-1) against the cycle with id `reference_id`.
// Output is ordered by cycle_id.
std::vector<SyncedCycle> synchronize_dataset(const BatteryDataset& dataset,
                                             int reference_id,
                                             const SyncConfig& cfg);

// Dump one synchronized cycle as `cycle_id,row,Tp,Ip,Vp` rows. With
// `scaled` the feature-matrix values are written instead of raw indexes.
void write_synced_csv(const SyncedCycle& cycle, const std::string& path,
                      bool scaled = false);

// Dump one warp path as `k_r,k_s` rows.
void write_path_csv(const WarpPath& path, const std::string& file_path);

}  // namespace cyclesync
