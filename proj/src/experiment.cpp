#include "cyclesync/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "cyclesync/errors.hpp"
#include "cyclesync/rng.hpp"

namespace cyclesync {

namespace {

double rmse_on(const LstmModel& model, std::span<const ModelInput> inputs) {
  std::vector<double> preds;
  std::vector<double> truths;
  preds.reserve(inputs.size());
  truths.reserve(inputs.size());
  for (const ModelInput& in : inputs) {
    preds.push_back(predict(model, in));
    truths.push_back(in.capacity_ah);
  }
  return loss_rmse(preds, truths);
}

std::vector<ModelInput> take(const std::vector<ModelInput>& all,
                             const std::vector<std::size_t>& idx) {
  std::vector<ModelInput> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

void expect_provenance(std::span<const ModelInput> inputs, Provenance want,
                       const char* arm) {
  for (const ModelInput& in : inputs) {
    if (in.provenance != want) {
      fail(errc::invalid_config,
           std::string(arm) + " arm received features of the wrong provenance");
    }
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_train_test(
    std::size_t n_cycles, const SplitSpec& spec, std::uint64_t seed) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    fail(errc::invalid_config, "train fraction must lie strictly in (0, 1)");
  }
  // The epsilon keeps exact products like 0.3 * 10 from flooring to 2.
  const std::size_t n_train = static_cast<std::size_t>(
      std::floor(spec.train_fraction * static_cast<double>(n_cycles) + 1e-9));
  if (n_train == 0 || n_train >= n_cycles) {
    fail(errc::degenerate_split,
         "split of " + std::to_string(n_cycles) + " cycles at fraction " +
             std::to_string(spec.train_fraction) + " leaves one side empty");
  }
  std::vector<std::size_t> order(n_cycles);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!spec.chronological) {
    std::mt19937_64 rng(seed);
    shuffle_in_place(order, rng);
  }
  std::vector<std::size_t> train(order.begin(),
                                 order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

ModelInput truncate_cycle(const CycleRecord& cycle, std::size_t target_len) {
  if (target_len < 2) {
    fail(errc::invalid_config, "truncation length must be at least 2");
  }
  if (cycle.length() < target_len) {
    fail(errc::cycle_shorter_than_target,
         "cycle " + std::to_string(cycle.cycle_id) + " has " +
             std::to_string(cycle.length()) + " ticks, cannot keep " +
             std::to_string(target_len));
  }
  const std::size_t start = cycle.length() - target_len;
  ModelInput input;
  input.cycle_id = cycle.cycle_id;
  input.capacity_ah = cycle.capacity_ah;
  input.provenance = Provenance::truncated_raw;
  input.features.resize(static_cast<Eigen::Index>(target_len), 3);
  for (std::size_t r = 0; r < target_len; ++r) {
    const Eigen::Index row = static_cast<Eigen::Index>(r);
    input.features(row, 0) = cycle.temperature_c[start + r];
    input.features(row, 1) = cycle.current_a[start + r];
    input.features(row, 2) = cycle.voltage_v[start + r];
  }
  return input;
}

ChannelScaler fit_scaler(std::span<const ModelInput> inputs) {
  if (inputs.empty()) {
    fail(errc::empty_input, "cannot fit a scaler on zero inputs");
  }
  ChannelScaler s;
  s.min.fill(std::numeric_limits<double>::infinity());
  s.max.fill(-std::numeric_limits<double>::infinity());
  for (const ModelInput& in : inputs) {
    for (int c = 0; c < 3; ++c) {
      s.min[static_cast<std::size_t>(c)] =
          std::min(s.min[static_cast<std::size_t>(c)], in.features.col(c).minCoeff());
      s.max[static_cast<std::size_t>(c)] =
          std::max(s.max[static_cast<std::size_t>(c)], in.features.col(c).maxCoeff());
    }
  }
  return s;
}

void apply_scaler(const ChannelScaler& scaler, ModelInput& input) {
  for (int c = 0; c < 3; ++c) {
    const double lo = scaler.min[static_cast<std::size_t>(c)];
    const double range = scaler.max[static_cast<std::size_t>(c)] - lo;
    // A channel that is constant across the training set maps to zero.
    const double denom = range > 0.0 ? range : 1.0;
    input.features.col(c) = (input.features.col(c).array() - lo) / denom;
  }
}

double improvement_percent(double rmse_synced, double rmse_truncated) {
  if (rmse_truncated == 0.0) {
    fail(errc::division_by_zero,
         "truncation-arm RMSE is zero; relative improvement is undefined");
  }
  return (rmse_synced - rmse_truncated) / rmse_truncated * 100.0;
}

ExperimentReport run_experiment(const BatteryDataset& dataset,
                                const ExperimentConfig& config) {
  validate_dataset(dataset);
  const auto [train_idx, test_idx] =
      split_train_test(dataset.size(), config.split, config.train.seed);

  // The reference is chosen from training cycles only, so the alignment
  // target never peeks at held-out data.
  BatteryDataset train_view;
  train_view.battery_id = dataset.battery_id;
  for (std::size_t i : train_idx) train_view.cycles.push_back(dataset.cycles[i]);
  int reference_id = 0;
  if (config.reference_cycle_id > 0) {
    reference_id = config.reference_cycle_id;
    const bool in_train = std::any_of(
        train_view.cycles.begin(), train_view.cycles.end(),
        [&](const CycleRecord& c) { return c.cycle_id == reference_id; });
    if (!in_train) {
      fail(errc::invalid_config,
           "reference cycle " + std::to_string(reference_id) +
               " is not in the training split");
    }
  } else {
    reference_id = select_reference(train_view, config.reference);
  }

  std::vector<SyncedCycle> synced =
      synchronize_dataset(dataset, reference_id, config.sync);
  std::vector<ModelInput> dtw_all;
  dtw_all.reserve(synced.size());
  for (const SyncedCycle& sc : synced) dtw_all.push_back(to_model_input(sc));

  const std::size_t target_len =
      config.truncate_len > 0 ? config.truncate_len : min_cycle_length(dataset);
  std::vector<ModelInput> manual_all;
  manual_all.reserve(dataset.size());
  for (const CycleRecord& c : dataset.cycles) {
    manual_all.push_back(truncate_cycle(c, target_len));
  }
  {
    std::vector<ModelInput> manual_train_raw = take(manual_all, train_idx);
    const ChannelScaler scaler = fit_scaler(manual_train_raw);
    for (ModelInput& in : manual_all) apply_scaler(scaler, in);
  }

  std::vector<ModelInput> dtw_train = take(dtw_all, train_idx);
  std::vector<ModelInput> dtw_test = take(dtw_all, test_idx);
  std::vector<ModelInput> manual_train = take(manual_all, train_idx);
  std::vector<ModelInput> manual_test = take(manual_all, test_idx);
  expect_provenance(dtw_train, Provenance::synchronized_indexes, "synchronized");
  expect_provenance(dtw_test, Provenance::synchronized_indexes, "synchronized");
  expect_provenance(manual_train, Provenance::truncated_raw, "truncation");
  expect_provenance(manual_test, Provenance::truncated_raw, "truncation");

  ExperimentReport report;
  report.battery_id = dataset.battery_id;
  report.n_cycles = dataset.size();
  report.n_train = train_idx.size();
  report.n_test = test_idx.size();
  report.reference_cycle_id = reference_id;
  report.aligned_rows = static_cast<std::size_t>(dtw_all.front().features.rows());
  report.truncate_len = target_len;
  report.config = config;

  LstmModel dtw_model = make_model(config.sizes, config.train.seed);
  const TrainResult dtw_fit = train(dtw_model, dtw_train, config.train);
  LstmModel manual_model = make_model(config.sizes, config.train.seed);
  const TrainResult manual_fit = train(manual_model, manual_train, config.train);

  report.rmse_dtw_train = rmse_on(dtw_model, dtw_train);
  report.rmse_dtw_test = rmse_on(dtw_model, dtw_test);
  report.rmse_manual_train = rmse_on(manual_model, manual_train);
  report.rmse_manual_test = rmse_on(manual_model, manual_test);
  report.improvement_pct =
      improvement_percent(report.rmse_dtw_test, report.rmse_manual_test);
  report.best_epoch_dtw = dtw_fit.best_epoch;
  report.best_epoch_manual = manual_fit.best_epoch;

  report.rows.reserve(test_idx.size());
  for (std::size_t k = 0; k < test_idx.size(); ++k) {
    PredictionRow row;
    row.cycle_id = dtw_test[k].cycle_id;
    row.truth_ah = dtw_test[k].capacity_ah;
    row.pred_dtw_ah = predict(dtw_model, dtw_test[k]);
    row.pred_manual_ah = predict(manual_model, manual_test[k]);
    report.rows.push_back(row);
  }

  if (config.include_timestamp) {
    report.timestamp = utc_timestamp();
  }
  return report;
}

std::string report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["battery_id"] = report.battery_id;
  if (!report.timestamp.empty()) {
    j["generated_at"] = report.timestamp;
  }
  j["dataset"] = {{"n_cycles", report.n_cycles},
                  {"n_train", report.n_train},
                  {"n_test", report.n_test},
                  {"train_fraction", report.config.split.train_fraction},
                  {"chronological", report.config.split.chronological}};
  j["sync"] = {{"reference_cycle_id", report.reference_cycle_id},
               {"aligned_rows", report.aligned_rows},
               {"radius", report.config.sync.dtw.radius},
               {"scale_features", report.config.sync.scale_features}};
  j["baseline"] = {{"truncate_len", report.truncate_len}};
  j["model"] = {{"input", report.config.sizes.input},
                {"hidden1", report.config.sizes.hidden1},
                {"hidden2", report.config.sizes.hidden2},
                {"dense", report.config.sizes.dense}};
  j["training"] = {{"epochs", report.config.train.epochs},
                   {"learning_rate", report.config.train.learning_rate},
                   {"seed", report.config.train.seed},
                   {"shuffle", report.config.train.shuffle},
                   {"clip_norm", report.config.train.clip_norm}};
  j["results"] = {{"rmse_dtw_train", report.rmse_dtw_train},
                  {"rmse_dtw_test", report.rmse_dtw_test},
                  {"rmse_manual_train", report.rmse_manual_train},
                  {"rmse_manual_test", report.rmse_manual_test},
                  {"improvement_pct", report.improvement_pct},
                  {"best_epoch_dtw", report.best_epoch_dtw},
                  {"best_epoch_manual", report.best_epoch_manual}};
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const PredictionRow& r : report.rows) {
    rows.push_back({{"cycle_id", r.cycle_id},
                    {"truth_Ah", r.truth_ah},
                    {"pred_dtw_Ah", r.pred_dtw_ah},
                    {"pred_manual_Ah", r.pred_manual_ah}});
  }
  j["test_predictions"] = std::move(rows);
  return j.dump(2) + "\n";
}

void write_report_json(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(errc::io_error, "cannot open '" + path + "' for writing");
  }
  out << report_to_json(report);
  if (!out) {
    fail(errc::io_error, "write to '" + path + "' failed");
  }
}

void write_predictions_csv(const ExperimentReport& report,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(errc::io_error, "cannot open '" + path + "' for writing");
  }
  out << "cycle_id,truth_Ah,pred_dtw_Ah,pred_manual_Ah\n";
  char buf[128];
  for (const PredictionRow& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f\n", r.cycle_id,
                  r.truth_ah, r.pred_dtw_ah, r.pred_manual_ah);
    out << buf;
  }
  if (!out) {
    fail(errc::io_error, "write to '" + path + "' failed");
  }
}

}  // namespace cyclesync
