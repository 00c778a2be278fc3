/* C interface to the cycle-synchronization + capacity-estimation library.
 *
 * All functions return cyclesync_status; on anything but CYCLESYNC_OK the
 * message from cyclesync_last_error() describes the failure (thread-local,
 * valid until the next failing call on the same thread). Out-parameters are
 * written only on success. Handles are freed with the matching *_free().
 */
#ifndef CYCLESYNC_H
#define CYCLESYNC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  CYCLESYNC_OK = 0,
  CYCLESYNC_ERR_ARGUMENT = 1,   /* null pointer or invalid option value */
  CYCLESYNC_ERR_VALIDATION = 2, /* data violates a documented invariant */
  CYCLESYNC_ERR_IO = 3,         /* file could not be read or written */
  CYCLESYNC_ERR_NUMERIC = 4     /* non-finite value or undefined quantity */
} cyclesync_status;

const char* cyclesync_version(void);
const char* cyclesync_last_error(void);

/* ---- datasets ---------------------------------------------------------- */

typedef struct cyclesync_dataset cyclesync_dataset;

/* CSV schema: cycle_id,tick_index,temperature_C,current_A,voltage_V,capacity_Ah
 * with a header row; cycle ids contiguous from 1. */
cyclesync_status cyclesync_dataset_load_csv(const char* path,
                                            cyclesync_dataset** out);
cyclesync_status cyclesync_dataset_write_csv(const cyclesync_dataset* dataset,
                                             const char* path);
void cyclesync_dataset_free(cyclesync_dataset* dataset);

size_t cyclesync_dataset_cycle_count(const cyclesync_dataset* dataset);
/* Returned pointer stays valid until the dataset is freed. */
const char* cyclesync_dataset_battery_id(const cyclesync_dataset* dataset);
/* Any out-pointer may be NULL to skip that field. */
cyclesync_status cyclesync_dataset_cycle_info(const cyclesync_dataset* dataset,
                                              size_t index, int* cycle_id,
                                              size_t* length,
                                              double* capacity_ah);

typedef struct {
  int cycles;                 /* number of discharge cycles to generate */
  int base_length;            /* ticks of the first (healthiest) cycle */
  double initial_capacity_ah; /* capacity of cycle 1 */
  double fade_rate;           /* mean per-cycle fractional capacity loss */
  double fade_jitter;         /* relative spread of the per-cycle loss */
  double regen_probability;   /* chance a cycle regains a little capacity */
  uint64_t seed;
} cyclesync_synth_options;

void cyclesync_synth_options_init(cyclesync_synth_options* options);
cyclesync_status cyclesync_dataset_generate(
    const cyclesync_synth_options* options, const char* battery_id,
    cyclesync_dataset** out);

/* ---- synchronization dumps --------------------------------------------- */

enum {
  CYCLESYNC_REFERENCE_FIRST = 0,  /* align everything to the first cycle */
  CYCLESYNC_REFERENCE_LONGEST = 1 /* align to the longest cycle */
};

typedef struct {
  int radius;             /* FastDTW search radius */
  int reference_policy;   /* CYCLESYNC_REFERENCE_* */
  int reference_cycle_id; /* > 0 overrides the policy */
  int scale_features;     /* nonzero divides matrix values by M-1 */
  int emit_paths;         /* also dump per-channel warp paths */
} cyclesync_sync_options;

void cyclesync_sync_options_init(cyclesync_sync_options* options);

/* Writes cycle_NNNN_synced.csv for every cycle into out_dir (created if
 * missing), plus cycle_NNNN_path_<channel>.csv when emit_paths is set. */
cyclesync_status cyclesync_sync_export(const cyclesync_dataset* dataset,
                                       const cyclesync_sync_options* options,
                                       const char* out_dir);

/* ---- models ------------------------------------------------------------ */

typedef struct cyclesync_model cyclesync_model;

typedef struct {
  int hidden1; /* units in the first LSTM layer */
  int hidden2; /* units in the second LSTM layer */
  int dense;   /* units in the ReLU layer before the scalar head */
  int epochs;
  double learning_rate;
  double clip_norm; /* global gradient-norm cap, <= 0 disables */
  uint64_t seed;
  int shuffle;            /* nonzero reshuffles sample order each epoch */
  int radius;             /* FastDTW radius used to build features */
  int reference_policy;   /* CYCLESYNC_REFERENCE_* */
  int reference_cycle_id; /* > 0 overrides the policy */
} cyclesync_train_options;

/* Full-size preset: 200/300 LSTM units, 100 dense, 100 epochs. */
void cyclesync_train_options_init_paper(cyclesync_train_options* options);
/* Small preset for fast smoke tests: 8/8 LSTM units, 8 dense, 30 epochs. */
void cyclesync_train_options_init_tiny(cyclesync_train_options* options);

/* Fits on every cycle in the dataset. The model keeps the reference cycle's
 * channels, so prediction on a fresh dataset needs no extra state. */
cyclesync_status cyclesync_model_train(const cyclesync_dataset* dataset,
                                       const cyclesync_train_options* options,
                                       cyclesync_model** out);
cyclesync_status cyclesync_model_save(const cyclesync_model* model,
                                      const char* path);
cyclesync_status cyclesync_model_load(const char* path, cyclesync_model** out);
void cyclesync_model_free(cyclesync_model* model);

/* Synchronizes the indexed cycle against the model's stored reference and
 * returns the estimated discharge capacity. */
cyclesync_status cyclesync_model_predict(const cyclesync_model* model,
                                         const cyclesync_dataset* dataset,
                                         size_t index, double* out_capacity_ah);

/* ---- comparison experiment --------------------------------------------- */

typedef struct {
  cyclesync_train_options train;
  double train_fraction; /* chronological split, strictly in (0, 1) */
  size_t truncate_len;   /* baseline length; 0 picks the shortest cycle */
  int include_timestamp; /* nonzero stamps the report with generation time */
} cyclesync_compare_options;

void cyclesync_compare_options_init_paper(cyclesync_compare_options* options);
void cyclesync_compare_options_init_tiny(cyclesync_compare_options* options);

typedef struct {
  double rmse_dtw_train;
  double rmse_dtw_test;
  double rmse_manual_train;
  double rmse_manual_test;
  double improvement_pct; /* negative when the DTW arm wins */
  size_t n_train;
  size_t n_test;
} cyclesync_compare_result;

/* Trains the DTW-synchronized arm and the truncation arm from identical
 * seeds and scores both on the held-out cycles. report_json_path and
 * predictions_csv_path may be NULL to skip writing that artifact. */
cyclesync_status cyclesync_compare(const cyclesync_dataset* dataset,
                                   const cyclesync_compare_options* options,
                                   const char* report_json_path,
                                   const char* predictions_csv_path,
                                   cyclesync_compare_result* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CYCLESYNC_H */
