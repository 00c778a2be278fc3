// Command-line front end. Everything below talks to the library through the
// C interface in cyclesync.h; no core headers are included here.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cyclesync.h"

namespace {

struct DatasetDeleter {
  void operator()(cyclesync_dataset* d) const { cyclesync_dataset_free(d); }
};
struct ModelDeleter {
  void operator()(cyclesync_model* m) const { cyclesync_model_free(m); }
};
using DatasetPtr = std::unique_ptr<cyclesync_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<cyclesync_model, ModelDeleter>;

// 0 success, 1 input/validation problem, 2 I/O or numeric failure.
int exit_code_for(cyclesync_status status) {
  switch (status) {
    case CYCLESYNC_OK:
      return 0;
    case CYCLESYNC_ERR_ARGUMENT:
    case CYCLESYNC_ERR_VALIDATION:
      return 1;
    default:
      return 2;
  }
}

int report_failure(cyclesync_status status) {
  std::fprintf(stderr, "error: %s\n", cyclesync_last_error());
  return exit_code_for(status);
}

DatasetPtr load_or_null(const std::string& path, cyclesync_status& status) {
  cyclesync_dataset* raw = nullptr;
  status = cyclesync_dataset_load_csv(path.c_str(), &raw);
  return DatasetPtr(raw);
}

int reference_policy_from(const std::string& name) {
  return name == "longest" ? CYCLESYNC_REFERENCE_LONGEST
                           : CYCLESYNC_REFERENCE_FIRST;
}

struct TrainFlags {
  std::string preset = "tiny";
  std::string reference = "first";
  int reference_id = 0;
  int epochs = 0;
  int hidden1 = 0;
  int hidden2 = 0;
  int dense = 0;
  double learning_rate = 0.0;
  double clip_norm = 0.0;
  std::uint64_t seed = 42;
  int radius = 10;
  bool no_shuffle = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--preset", f.preset, "Model size preset")
      ->check(CLI::IsMember({"paper", "tiny"}))
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Seed for weight init and shuffling")
      ->capture_default_str();
  cmd->add_option("--radius", f.radius, "FastDTW search radius")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--reference", f.reference, "Reference cycle policy")
      ->check(CLI::IsMember({"first", "longest"}))
      ->capture_default_str();
  cmd->add_option("--reference-id", f.reference_id,
                  "Explicit reference cycle id (overrides --reference)");
  cmd->add_option("--epochs", f.epochs, "Override the preset's epoch count");
  cmd->add_option("--learning-rate", f.learning_rate,
                  "Override the preset's learning rate");
  cmd->add_option("--clip-norm", f.clip_norm,
                  "Override the gradient-norm cap (<= 0 disables)");
  cmd->add_option("--hidden1", f.hidden1, "Override first LSTM layer width");
  cmd->add_option("--hidden2", f.hidden2, "Override second LSTM layer width");
  cmd->add_option("--dense", f.dense, "Override dense layer width");
  cmd->add_flag("--no-shuffle", f.no_shuffle,
                "Keep a fixed sample order across epochs");
}

cyclesync_train_options make_train_options(const CLI::App* cmd,
                                           const TrainFlags& f) {
  cyclesync_train_options o;
  if (f.preset == "paper") {
    cyclesync_train_options_init_paper(&o);
  } else {
    cyclesync_train_options_init_tiny(&o);
  }
  o.seed = f.seed;
  o.radius = f.radius;
  o.reference_policy = reference_policy_from(f.reference);
  o.reference_cycle_id = f.reference_id;
  if (cmd->count("--epochs") > 0) o.epochs = f.epochs;
  if (cmd->count("--learning-rate") > 0) o.learning_rate = f.learning_rate;
  if (cmd->count("--clip-norm") > 0) o.clip_norm = f.clip_norm;
  if (cmd->count("--hidden1") > 0) o.hidden1 = f.hidden1;
  if (cmd->count("--hidden2") > 0) o.hidden2 = f.hidden2;
  if (cmd->count("--dense") > 0) o.dense = f.dense;
  if (f.no_shuffle) o.shuffle = 0;
  return o;
}

int cmd_validate(const std::string& input) {
  cyclesync_status status;
  DatasetPtr ds = load_or_null(input, status);
  if (!ds) return report_failure(status);

  const size_t n = cyclesync_dataset_cycle_count(ds.get());
  size_t min_len = 0, max_len = 0;
  double min_cap = 0.0, max_cap = 0.0;
  for (size_t i = 0; i < n; ++i) {
    int id = 0;
    size_t len = 0;
    double cap = 0.0;
    cyclesync_dataset_cycle_info(ds.get(), i, &id, &len, &cap);
    std::printf("cycle %d: %zu ticks, %.6f Ah\n", id, len, cap);
    if (i == 0) {
      min_len = max_len = len;
      min_cap = max_cap = cap;
    } else {
      min_len = std::min(min_len, len);
      max_len = std::max(max_len, len);
      min_cap = std::min(min_cap, cap);
      max_cap = std::max(max_cap, cap);
    }
  }
  std::printf("%s: %zu cycles, length %zu..%zu, capacity %.6f..%.6f Ah\n",
              cyclesync_dataset_battery_id(ds.get()), n, min_len, max_len,
              min_cap, max_cap);
  return 0;
}

int cmd_gen_synth(const std::string& output, const cyclesync_synth_options& o,
                  const std::string& battery_id) {
  cyclesync_dataset* raw = nullptr;
  cyclesync_status status = cyclesync_dataset_generate(
      &o, battery_id.empty() ? nullptr : battery_id.c_str(), &raw);
  DatasetPtr ds(raw);
  if (!ds) return report_failure(status);
  status = cyclesync_dataset_write_csv(ds.get(), output.c_str());
  if (status != CYCLESYNC_OK) return report_failure(status);
  std::printf("wrote %zu cycles to %s\n", cyclesync_dataset_cycle_count(ds.get()),
              output.c_str());
  return 0;
}

int cmd_sync(const std::string& input, const std::string& out_dir,
             const cyclesync_sync_options& o) {
  cyclesync_status status;
  DatasetPtr ds = load_or_null(input, status);
  if (!ds) return report_failure(status);
  status = cyclesync_sync_export(ds.get(), &o, out_dir.c_str());
  if (status != CYCLESYNC_OK) return report_failure(status);
  std::printf("synchronized %zu cycles into %s\n",
              cyclesync_dataset_cycle_count(ds.get()), out_dir.c_str());
  return 0;
}

int cmd_train(const std::string& input, const std::string& checkpoint,
              const cyclesync_train_options& o) {
  cyclesync_status status;
  DatasetPtr ds = load_or_null(input, status);
  if (!ds) return report_failure(status);

  cyclesync_model* raw = nullptr;
  status = cyclesync_model_train(ds.get(), &o, &raw);
  ModelPtr model(raw);
  if (!model) return report_failure(status);

  status = cyclesync_model_save(model.get(), checkpoint.c_str());
  if (status != CYCLESYNC_OK) return report_failure(status);
  std::printf("trained on %zu cycles, checkpoint written to %s\n",
              cyclesync_dataset_cycle_count(ds.get()), checkpoint.c_str());
  return 0;
}

int cmd_predict(const std::string& input, const std::string& checkpoint,
                const std::string& output) {
  cyclesync_status status;
  DatasetPtr ds = load_or_null(input, status);
  if (!ds) return report_failure(status);

  cyclesync_model* raw = nullptr;
  status = cyclesync_model_load(checkpoint.c_str(), &raw);
  ModelPtr model(raw);
  if (!model) return report_failure(status);

  std::FILE* out = std::fopen(output.c_str(), "wb");
  if (out == nullptr) {
    std::fprintf(stderr, "error: IoError: cannot open '%s' for writing\n",
                 output.c_str());
    return 2;
  }
  std::fputs("cycle_id,pred_Ah,truth_Ah\n", out);
  const size_t n = cyclesync_dataset_cycle_count(ds.get());
  double sq_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    int id = 0;
    double truth = 0.0;
    cyclesync_dataset_cycle_info(ds.get(), i, &id, nullptr, &truth);
    double pred = 0.0;
    status = cyclesync_model_predict(model.get(), ds.get(), i, &pred);
    if (status != CYCLESYNC_OK) {
      std::fclose(out);
      return report_failure(status);
    }
    std::fprintf(out, "%d,%.6f,%.6f\n", id, pred, truth);
    sq_sum += (pred - truth) * (pred - truth);
  }
  std::fclose(out);
  std::printf("predicted %zu cycles, RMSE %.6f Ah, wrote %s\n", n,
              n > 0 ? std::sqrt(sq_sum / static_cast<double>(n)) : 0.0,
              output.c_str());
  return 0;
}

int cmd_compare(const std::string& input, const cyclesync_compare_options& o,
                const std::string& report_path, const std::string& csv_path) {
  cyclesync_status status;
  DatasetPtr ds = load_or_null(input, status);
  if (!ds) return report_failure(status);

  cyclesync_compare_result result{};
  status = cyclesync_compare(ds.get(), &o,
                             report_path.empty() ? nullptr : report_path.c_str(),
                             csv_path.empty() ? nullptr : csv_path.c_str(),
                             &result);
  if (status != CYCLESYNC_OK) return report_failure(status);

  std::printf("split: %zu train / %zu test cycles\n", result.n_train,
              result.n_test);
  std::printf("test RMSE  synchronized: %.6f Ah\n", result.rmse_dtw_test);
  std::printf("test RMSE  truncated:    %.6f Ah\n", result.rmse_manual_test);
  std::printf("train RMSE synchronized: %.6f Ah\n", result.rmse_dtw_train);
  std::printf("train RMSE truncated:    %.6f Ah\n", result.rmse_manual_train);
  std::printf("improvement: %+.1f%%\n", result.improvement_pct);
  if (!report_path.empty()) std::printf("report: %s\n", report_path.c_str());
  if (!csv_path.empty()) std::printf("predictions: %s\n", csv_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Battery cycle synchronization and capacity estimation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML file");
  app.set_version_flag("--version", std::string(cyclesync_version()));

  std::string input, output, out_dir, checkpoint;
  std::string report_path, csv_path, battery_id;

  auto* validate = app.add_subcommand("validate", "Check a cycle-log CSV");
  validate->add_option("input", input, "CSV file to check")->required();

  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic cycle log");
  cyclesync_synth_options synth_opts;
  cyclesync_synth_options_init(&synth_opts);
  gen->add_option("output", output, "Destination CSV")->required();
  gen->add_option("--cycles", synth_opts.cycles, "Number of cycles")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen->add_option("--base-length", synth_opts.base_length,
                  "Ticks of the first cycle")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen->add_option("--capacity", synth_opts.initial_capacity_ah,
                  "Initial capacity in Ah")
      ->capture_default_str();
  gen->add_option("--fade-rate", synth_opts.fade_rate,
                  "Mean per-cycle fractional capacity loss")
      ->capture_default_str();
  gen->add_option("--fade-jitter", synth_opts.fade_jitter,
                  "Relative spread of the per-cycle loss")
      ->capture_default_str();
  gen->add_option("--regen-prob", synth_opts.regen_probability,
                  "Chance a cycle regains capacity")
      ->capture_default_str();
  gen->add_option("--seed", synth_opts.seed, "Generator seed")
      ->capture_default_str();
  gen->add_option("--battery-id", battery_id, "Battery id to embed");

  auto* sync = app.add_subcommand("sync", "Export synchronized cycle matrices");
  cyclesync_sync_options sync_opts;
  cyclesync_sync_options_init(&sync_opts);
  std::string sync_reference = "first";
  bool sync_scaled = false, sync_paths = false;
  sync->add_option("input", input, "CSV file to synchronize")->required();
  sync->add_option("outdir", out_dir, "Directory for per-cycle CSVs")->required();
  sync->add_option("--radius", sync_opts.radius, "FastDTW search radius")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sync->add_option("--reference", sync_reference, "Reference cycle policy")
      ->check(CLI::IsMember({"first", "longest"}))
      ->capture_default_str();
  sync->add_option("--reference-id", sync_opts.reference_cycle_id,
                   "Explicit reference cycle id (overrides --reference)");
  sync->add_flag("--scaled", sync_scaled,
                 "Write model-ready values scaled by 1/(M-1)");
  sync->add_flag("--emit-paths", sync_paths, "Also dump per-channel warp paths");

  auto* train = app.add_subcommand("train", "Fit a model and save a checkpoint");
  TrainFlags train_flags;
  train->add_option("input", input, "Training CSV")->required();
  train->add_option("checkpoint", checkpoint, "Checkpoint file to write")
      ->required();
  add_train_flags(train, train_flags);

  auto* predict = app.add_subcommand("predict", "Estimate capacities per cycle");
  predict->add_option("input", input, "CSV with cycles to score")->required();
  predict->add_option("checkpoint", checkpoint, "Checkpoint file to load")
      ->required();
  predict->add_option("output", output, "Prediction CSV to write")->required();

  auto* compare = app.add_subcommand(
      "compare", "Synchronized vs truncated features, trained head to head");
  TrainFlags compare_flags;
  double split_fraction = 0.7;
  std::size_t truncate_len = 0;
  bool no_timestamp = false;
  compare->add_option("input", input, "CSV with the full cycle history")
      ->required();
  add_train_flags(compare, compare_flags);
  compare->add_option("--split", split_fraction,
                      "Fraction of cycles used for training")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  compare->add_option("--truncate-len", truncate_len,
                      "Baseline length (0 = shortest cycle)");
  compare->add_flag("--no-timestamp", no_timestamp,
                    "Omit the generation time from the report");
  compare->add_option("--report", report_path, "Write the JSON report here");
  compare->add_option("--predictions", csv_path,
                      "Write per-cycle test predictions here");

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) return cmd_validate(input);
  if (gen->parsed()) return cmd_gen_synth(output, synth_opts, battery_id);
  if (sync->parsed()) {
    sync_opts.reference_policy = reference_policy_from(sync_reference);
    sync_opts.scale_features = sync_scaled ? 1 : 0;
    sync_opts.emit_paths = sync_paths ? 1 : 0;
    return cmd_sync(input, out_dir, sync_opts);
  }
  if (train->parsed()) {
    return cmd_train(input, checkpoint, make_train_options(train, train_flags));
  }
  if (predict->parsed()) return cmd_predict(input, checkpoint, output);
  if (compare->parsed()) {
    cyclesync_compare_options o;
    if (compare_flags.preset == "paper") {
      cyclesync_compare_options_init_paper(&o);
    } else {
      cyclesync_compare_options_init_tiny(&o);
    }
    o.train = make_train_options(compare, compare_flags);
    o.train_fraction = split_fraction;
    o.truncate_len = truncate_len;
    o.include_timestamp = no_timestamp ? 0 : 1;
    return cmd_compare(input, o, report_path, csv_path);
  }
  return 0;
}
