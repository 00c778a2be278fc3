#include "cyclesync/sync.hpp"

#include <cstdio>
#include <fstream>

#include "cyclesync/errors.hpp"

namespace cyclesync {

const char* channel_tag_name(ChannelTag tag) {
  switch (tag) {
    case ChannelTag::temperature: return "temperature";
    case ChannelTag::current: return "current";
    case ChannelTag::voltage: return "voltage";
  }
  return "unknown";
}

int select_reference(const BatteryDataset& dataset, ReferencePolicy policy) {
  if (dataset.cycles.empty()) {
    fail(errc::empty_dataset, "cannot pick a reference from an empty dataset");
  }
  if (policy == ReferencePolicy::first_cycle) {
    return dataset.cycles.front().cycle_id;
  }
  const CycleRecord* best = &dataset.cycles.front();
  for (const CycleRecord& c : dataset.cycles) {
    if (c.length() > best->length()) best = &c;  // ties keep the smaller id
  }
  return best->cycle_id;
}

std::vector<double> aggregate_sample_indexes(const WarpPath& path,
                                             std::size_t ref_len,
                                             std::size_t sample_len) {
  std::vector<double> sums(ref_len, 0.0);
  std::vector<int> counts(ref_len, 0);
  for (const PathPair& p : path.pairs) {
    sums[static_cast<std::size_t>(p.ref)] += p.sample;
    counts[static_cast<std::size_t>(p.ref)] += 1;
  }
  std::vector<double> values(ref_len, 0.0);
  for (std::size_t i = 0; i < ref_len; ++i) {
    if (counts[i] == 0) {
      fail(errc::shape_mismatch,
           "warp path leaves reference index " + std::to_string(i) +
               " unfilled");
    }
    values[i] = sums[i] / counts[i];
  }
  // The path's endpoints map first-to-first and last-to-last; keep the
  // output pinned there even when the end slots aggregated several sample
  // indexes (the mean would otherwise drift inward).
  values.front() = 0.0;
  values.back() = static_cast<double>(sample_len) - 1.0;
  return values;
}

SyncedChannel synchronize_channel(std::span<const double> reference,
                                  std::span<const double> sample,
                                  ChannelTag tag, const FastDtwConfig& cfg) {
  const WarpPath path = fastdtw(reference, sample, cfg);
  SyncedChannel channel;
  channel.tag = tag;
  channel.values = aggregate_sample_indexes(path, reference.size(), sample.size());
  return channel;
}

SyncedCycle synchronize_cycle(const CycleRecord& reference_cycle,
                              const CycleRecord& sample_cycle,
                              const SyncConfig& cfg) {
  SyncedCycle out;
  out.cycle_id = sample_cycle.cycle_id;
  out.capacity_ah = sample_cycle.capacity_ah;
  out.channels[0] = synchronize_channel(reference_cycle.temperature_c,
                                        sample_cycle.temperature_c,
                                        ChannelTag::temperature, cfg.dtw);
  out.channels[1] =
      synchronize_channel(reference_cycle.current_a, sample_cycle.current_a,
                          ChannelTag::current, cfg.dtw);
  out.channels[2] =
      synchronize_channel(reference_cycle.voltage_v, sample_cycle.voltage_v,
                          ChannelTag::voltage, cfg.dtw);

  const std::size_t rows = reference_cycle.length();
  const double scale =
      cfg.scale_features ? 1.0 / (static_cast<double>(rows) - 1.0) : 1.0;
  out.feature_matrix.resize(static_cast<Eigen::Index>(rows), 3);
  for (int col = 0; col < 3; ++col) {
    const std::vector<double>& values = out.channels[col].values;
    for (std::size_t r = 0; r < rows; ++r) {
      out.feature_matrix(static_cast<Eigen::Index>(r), col) =
          values[r] * scale;
    }
  }
  return out;
}

std::vector<SyncedCycle> synchronize_dataset(const BatteryDataset& dataset,
                                             int reference_id,
                                             const SyncConfig& cfg) {
  const CycleRecord* reference = nullptr;
  for (const CycleRecord& c : dataset.cycles) {
    if (c.cycle_id == reference_id) {
      reference = &c;
      break;
    }
  }
  if (reference == nullptr) {
    fail(errc::unknown_reference_id,
         "reference cycle " + std::to_string(reference_id) +
             " not in dataset");
  }

  std::vector<SyncedCycle> out;
  out.reserve(dataset.cycles.size());
  for (const CycleRecord& cycle : dataset.cycles) {
    try {
      out.push_back(synchronize_cycle(*reference, cycle, cfg));
    } catch (const Error& e) {
      fail(e.code(), "while synchronizing cycle " +
                         std::to_string(cycle.cycle_id) + ": " + e.what());
    }
  }
  return out;
}

void write_synced_csv(const SyncedCycle& cycle, const std::string& path,
                      bool scaled) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(errc::io_error, "cannot open '" + path + "' for writing");
  }
  out << "cycle_id,row,Tp,Ip,Vp\n";
  const Eigen::Index rows = cycle.feature_matrix.rows();
  char buf[160];
  for (Eigen::Index r = 0; r < rows; ++r) {
    double t, i, v;
    if (scaled) {
      t = cycle.feature_matrix(r, 0);
      i = cycle.feature_matrix(r, 1);
      v = cycle.feature_matrix(r, 2);
    } else {
      t = cycle.channels[0].values[static_cast<std::size_t>(r)];
      i = cycle.channels[1].values[static_cast<std::size_t>(r)];
      v = cycle.channels[2].values[static_cast<std::size_t>(r)];
    }
    std::snprintf(buf, sizeof(buf), "%d,%lld,%.6f,%.6f,%.6f\n", cycle.cycle_id,
                  static_cast<long long>(r), t, i, v);
    out << buf;
  }
}

void write_path_csv(const WarpPath& path, const std::string& file_path) {
  std::ofstream out(file_path, std::ios::binary);
  if (!out) {
    fail(errc::io_error, "cannot open '" + file_path + "' for writing");
  }
  out << "k_r,k_s\n";
  for (const PathPair& p : path.pairs) {
    out << p.ref << ',' << p.sample << '\n';
  }
}

}  // namespace cyclesync
