#include "cyclesync.h"

#include <array>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cyclesync/checkpoint.hpp"
#include "cyclesync/csv.hpp"
#include "cyclesync/errors.hpp"
#include "cyclesync/experiment.hpp"
#include "cyclesync/synth.hpp"
#include "cyclesync/train.hpp"

struct cyclesync_dataset {
  cyclesync::BatteryDataset data;
};

struct cyclesync_model {
  cyclesync::Checkpoint ckpt;
  cyclesync::CycleRecord reference;  // rebuilt from the checkpoint metadata
};

namespace {

thread_local std::string g_last_error;

cyclesync_status classify(cyclesync::errc code) {
  using cyclesync::errc;
  switch (code) {
    case errc::io_error:
      return CYCLESYNC_ERR_IO;
    case errc::invalid_config:
      return CYCLESYNC_ERR_ARGUMENT;
    case errc::non_finite_activation:
    case errc::division_by_zero:
      return CYCLESYNC_ERR_NUMERIC;
    default:
      return CYCLESYNC_ERR_VALIDATION;
  }
}

cyclesync_status set_error(cyclesync_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

cyclesync_status bad_argument(const char* message) {
  return set_error(CYCLESYNC_ERR_ARGUMENT, message);
}

template <typename Fn>
cyclesync_status guarded(Fn&& fn) {
  try {
    fn();
    return CYCLESYNC_OK;
  } catch (const cyclesync::Error& e) {
    return set_error(classify(e.code()),
                     std::string(cyclesync::errc_name(e.code())) + ": " + e.what());
  } catch (const std::exception& e) {
    return set_error(CYCLESYNC_ERR_NUMERIC, e.what());
  } catch (...) {
    return set_error(CYCLESYNC_ERR_NUMERIC, "unknown failure");
  }
}

cyclesync::ReferencePolicy to_policy(int value) {
  if (value != CYCLESYNC_REFERENCE_FIRST && value != CYCLESYNC_REFERENCE_LONGEST) {
    cyclesync::fail(cyclesync::errc::invalid_config,
                    "reference_policy must be 0 (first) or 1 (longest)");
  }
  return value == CYCLESYNC_REFERENCE_FIRST
             ? cyclesync::ReferencePolicy::first_cycle
             : cyclesync::ReferencePolicy::longest_cycle;
}

int pick_reference(const cyclesync::BatteryDataset& ds, int policy,
                   int explicit_id) {
  if (explicit_id > 0) {
    ds.cycle_by_id(explicit_id);  // existence check
    return explicit_id;
  }
  return cyclesync::select_reference(ds, to_policy(policy));
}

cyclesync::ModelSizes sizes_from(const cyclesync_train_options& o) {
  cyclesync::ModelSizes s;
  s.hidden1 = o.hidden1;
  s.hidden2 = o.hidden2;
  s.dense = o.dense;
  return s;
}

cyclesync::TrainConfig train_config_from(const cyclesync_train_options& o) {
  cyclesync::TrainConfig t;
  t.epochs = o.epochs;
  t.learning_rate = o.learning_rate;
  t.clip_norm = o.clip_norm;
  t.seed = o.seed;
  t.shuffle = o.shuffle != 0;
  return t;
}

}  // namespace

extern "C" {

const char* cyclesync_version(void) { return "0.1.0"; }

const char* cyclesync_last_error(void) { return g_last_error.c_str(); }

cyclesync_status cyclesync_dataset_load_csv(const char* path,
                                            cyclesync_dataset** out) {
  if (path == nullptr || out == nullptr) return bad_argument("null argument");
  return guarded([&] {
    auto handle = std::make_unique<cyclesync_dataset>();
    handle->data = cyclesync::load_dataset(path);
    *out = handle.release();
  });
}

cyclesync_status cyclesync_dataset_write_csv(const cyclesync_dataset* dataset,
                                             const char* path) {
  if (dataset == nullptr || path == nullptr) return bad_argument("null argument");
  return guarded([&] { cyclesync::write_dataset(dataset->data, path); });
}

void cyclesync_dataset_free(cyclesync_dataset* dataset) { delete dataset; }

size_t cyclesync_dataset_cycle_count(const cyclesync_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->data.size();
}

const char* cyclesync_dataset_battery_id(const cyclesync_dataset* dataset) {
  return dataset == nullptr ? "" : dataset->data.battery_id.c_str();
}

cyclesync_status cyclesync_dataset_cycle_info(const cyclesync_dataset* dataset,
                                              size_t index, int* cycle_id,
                                              size_t* length,
                                              double* capacity_ah) {
  if (dataset == nullptr) return bad_argument("null dataset");
  if (index >= dataset->data.size()) {
    return set_error(CYCLESYNC_ERR_ARGUMENT,
                     "cycle index " + std::to_string(index) + " out of range");
  }
  const cyclesync::CycleRecord& c = dataset->data.cycles[index];
  if (cycle_id != nullptr) *cycle_id = c.cycle_id;
  if (length != nullptr) *length = c.length();
  if (capacity_ah != nullptr) *capacity_ah = c.capacity_ah;
  return CYCLESYNC_OK;
}

void cyclesync_synth_options_init(cyclesync_synth_options* options) {
  if (options == nullptr) return;
  const cyclesync::SynthConfig d;
  options->cycles = d.cycles;
  options->base_length = d.base_length;
  options->initial_capacity_ah = d.initial_capacity_ah;
  options->fade_rate = d.fade_rate;
  options->fade_jitter = d.fade_jitter;
  options->regen_probability = d.regen_probability;
  options->seed = 42;
}

cyclesync_status cyclesync_dataset_generate(
    const cyclesync_synth_options* options, const char* battery_id,
    cyclesync_dataset** out) {
  if (options == nullptr || out == nullptr) return bad_argument("null argument");
  return guarded([&] {
    cyclesync::SynthConfig cfg;
    cfg.cycles = options->cycles;
    cfg.base_length = options->base_length;
    cfg.initial_capacity_ah = options->initial_capacity_ah;
    cfg.fade_rate = options->fade_rate;
    cfg.fade_jitter = options->fade_jitter;
    cfg.regen_probability = options->regen_probability;
    auto handle = std::make_unique<cyclesync_dataset>();
    handle->data = cyclesync::generate_synthetic(cfg, options->seed);
    if (battery_id != nullptr && battery_id[0] != '\0') {
      handle->data.battery_id = battery_id;
    }
    *out = handle.release();
  });
}

void cyclesync_sync_options_init(cyclesync_sync_options* options) {
  if (options == nullptr) return;
  options->radius = cyclesync::FastDtwConfig{}.radius;
  options->reference_policy = CYCLESYNC_REFERENCE_FIRST;
  options->reference_cycle_id = 0;
  options->scale_features = 0;
  options->emit_paths = 0;
}

cyclesync_status cyclesync_sync_export(const cyclesync_dataset* dataset,
                                       const cyclesync_sync_options* options,
                                       const char* out_dir) {
  if (dataset == nullptr || options == nullptr || out_dir == nullptr) {
    return bad_argument("null argument");
  }
  return guarded([&] {
    namespace fs = std::filesystem;
    const cyclesync::BatteryDataset& ds = dataset->data;
    cyclesync::validate_dataset(ds);
    const int ref_id =
        pick_reference(ds, options->reference_policy, options->reference_cycle_id);

    cyclesync::SyncConfig cfg;
    cfg.dtw.radius = options->radius;
    cfg.scale_features = options->scale_features != 0;

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
      cyclesync::fail(cyclesync::errc::io_error,
                      "cannot create '" + std::string(out_dir) + "': " + ec.message());
    }

    const cyclesync::CycleRecord& ref = ds.cycle_by_id(ref_id);
    char name[64];
    for (const cyclesync::CycleRecord& cycle : ds.cycles) {
      const cyclesync::SyncedCycle synced =
          cyclesync::synchronize_cycle(ref, cycle, cfg);
      std::snprintf(name, sizeof(name), "cycle_%04d_synced.csv", cycle.cycle_id);
      cyclesync::write_synced_csv(synced, (fs::path(out_dir) / name).string(),
                                  cfg.scale_features);
      if (options->emit_paths != 0) {
        const std::array<std::pair<const std::vector<double>*,
                                   cyclesync::ChannelTag>, 3>
            channels = {{{&cycle.temperature_c, cyclesync::ChannelTag::temperature},
                         {&cycle.current_a, cyclesync::ChannelTag::current},
                         {&cycle.voltage_v, cyclesync::ChannelTag::voltage}}};
        for (const auto& [values, tag] : channels) {
          const std::vector<double>& ref_values =
              tag == cyclesync::ChannelTag::temperature ? ref.temperature_c
              : tag == cyclesync::ChannelTag::current   ? ref.current_a
                                                        : ref.voltage_v;
          const cyclesync::WarpPath path =
              cyclesync::fastdtw(ref_values, *values, cfg.dtw);
          std::snprintf(name, sizeof(name), "cycle_%04d_path_%s.csv",
                        cycle.cycle_id, cyclesync::channel_tag_name(tag));
          cyclesync::write_path_csv(path, (fs::path(out_dir) / name).string());
        }
      }
    }
  });
}

void cyclesync_train_options_init_paper(cyclesync_train_options* options) {
  if (options == nullptr) return;
  options->hidden1 = 200;
  options->hidden2 = 300;
  options->dense = 100;
  options->epochs = 100;
  options->learning_rate = 1e-3;
  options->clip_norm = 5.0;
  options->seed = 42;
  options->shuffle = 1;
  options->radius = cyclesync::FastDtwConfig{}.radius;
  options->reference_policy = CYCLESYNC_REFERENCE_FIRST;
  options->reference_cycle_id = 0;
}

void cyclesync_train_options_init_tiny(cyclesync_train_options* options) {
  if (options == nullptr) return;
  cyclesync_train_options_init_paper(options);
  options->hidden1 = 8;
  options->hidden2 = 8;
  options->dense = 8;
  options->epochs = 30;
}

cyclesync_status cyclesync_model_train(const cyclesync_dataset* dataset,
                                       const cyclesync_train_options* options,
                                       cyclesync_model** out) {
  if (dataset == nullptr || options == nullptr || out == nullptr) {
    return bad_argument("null argument");
  }
  return guarded([&] {
    const cyclesync::BatteryDataset& ds = dataset->data;
    cyclesync::validate_dataset(ds);
    const int ref_id =
        pick_reference(ds, options->reference_policy, options->reference_cycle_id);

    cyclesync::SyncConfig sync_cfg;
    sync_cfg.dtw.radius = options->radius;
    sync_cfg.scale_features = true;

    const std::vector<cyclesync::SyncedCycle> synced =
        cyclesync::synchronize_dataset(ds, ref_id, sync_cfg);
    std::vector<cyclesync::ModelInput> inputs;
    inputs.reserve(synced.size());
    for (const cyclesync::SyncedCycle& sc : synced) {
      inputs.push_back(cyclesync::to_model_input(sc));
    }

    auto handle = std::make_unique<cyclesync_model>();
    handle->ckpt.model = cyclesync::make_model(sizes_from(*options), options->seed);
    cyclesync::train(handle->ckpt.model, inputs, train_config_from(*options));

    const cyclesync::CycleRecord& ref = ds.cycle_by_id(ref_id);
    handle->ckpt.meta.battery_id = ds.battery_id;
    handle->ckpt.meta.reference_cycle_id = ref_id;
    handle->ckpt.meta.rows = static_cast<int>(ref.length());
    handle->ckpt.meta.scale_features = true;
    handle->ckpt.meta.radius = options->radius;
    handle->ckpt.meta.reference_temperature_c = ref.temperature_c;
    handle->ckpt.meta.reference_current_a = ref.current_a;
    handle->ckpt.meta.reference_voltage_v = ref.voltage_v;
    handle->reference = ref;
    *out = handle.release();
  });
}

cyclesync_status cyclesync_model_save(const cyclesync_model* model,
                                      const char* path) {
  if (model == nullptr || path == nullptr) return bad_argument("null argument");
  return guarded([&] { cyclesync::save_checkpoint(model->ckpt, path); });
}

cyclesync_status cyclesync_model_load(const char* path, cyclesync_model** out) {
  if (path == nullptr || out == nullptr) return bad_argument("null argument");
  return guarded([&] {
    auto handle = std::make_unique<cyclesync_model>();
    handle->ckpt = cyclesync::load_checkpoint(path);
    handle->reference.cycle_id = handle->ckpt.meta.reference_cycle_id;
    handle->reference.temperature_c = handle->ckpt.meta.reference_temperature_c;
    handle->reference.current_a = handle->ckpt.meta.reference_current_a;
    handle->reference.voltage_v = handle->ckpt.meta.reference_voltage_v;
    handle->reference.capacity_ah = 1.0;  // label unused for alignment
    *out = handle.release();
  });
}

void cyclesync_model_free(cyclesync_model* model) { delete model; }

cyclesync_status cyclesync_model_predict(const cyclesync_model* model,
                                         const cyclesync_dataset* dataset,
                                         size_t index,
                                         double* out_capacity_ah) {
  if (model == nullptr || dataset == nullptr || out_capacity_ah == nullptr) {
    return bad_argument("null argument");
  }
  if (index >= dataset->data.size()) {
    return set_error(CYCLESYNC_ERR_ARGUMENT,
                     "cycle index " + std::to_string(index) + " out of range");
  }
  return guarded([&] {
    cyclesync::SyncConfig cfg;
    cfg.dtw.radius = model->ckpt.meta.radius;
    cfg.scale_features = model->ckpt.meta.scale_features;
    const cyclesync::SyncedCycle synced = cyclesync::synchronize_cycle(
        model->reference, dataset->data.cycles[index], cfg);
    *out_capacity_ah =
        cyclesync::predict(model->ckpt.model, cyclesync::to_model_input(synced));
  });
}

void cyclesync_compare_options_init_paper(cyclesync_compare_options* options) {
  if (options == nullptr) return;
  cyclesync_train_options_init_paper(&options->train);
  options->train_fraction = 0.7;
  options->truncate_len = 0;
  options->include_timestamp = 1;
}

void cyclesync_compare_options_init_tiny(cyclesync_compare_options* options) {
  if (options == nullptr) return;
  cyclesync_compare_options_init_paper(options);
  cyclesync_train_options_init_tiny(&options->train);
}

cyclesync_status cyclesync_compare(const cyclesync_dataset* dataset,
                                   const cyclesync_compare_options* options,
                                   const char* report_json_path,
                                   const char* predictions_csv_path,
                                   cyclesync_compare_result* out) {
  if (dataset == nullptr || options == nullptr) return bad_argument("null argument");
  return guarded([&] {
    cyclesync::ExperimentConfig cfg;
    cfg.sync.dtw.radius = options->train.radius;
    cfg.sync.scale_features = true;
    cfg.reference = to_policy(options->train.reference_policy);
    cfg.reference_cycle_id = options->train.reference_cycle_id;
    cfg.split.train_fraction = options->train_fraction;
    cfg.train = train_config_from(options->train);
    cfg.sizes = sizes_from(options->train);
    cfg.truncate_len = options->truncate_len;
    cfg.include_timestamp = options->include_timestamp != 0;

    const cyclesync::ExperimentReport report =
        cyclesync::run_experiment(dataset->data, cfg);
    if (report_json_path != nullptr) {
      cyclesync::write_report_json(report, report_json_path);
    }
    if (predictions_csv_path != nullptr) {
      cyclesync::write_predictions_csv(report, predictions_csv_path);
    }
    if (out != nullptr) {
      out->rmse_dtw_train = report.rmse_dtw_train;
      out->rmse_dtw_test = report.rmse_dtw_test;
      out->rmse_manual_train = report.rmse_manual_train;
      out->rmse_manual_test = report.rmse_manual_test;
      out->improvement_pct = report.improvement_pct;
      out->n_train = report.n_train;
      out->n_test = report.n_test;
    }
  });
}

}  // extern "C"
