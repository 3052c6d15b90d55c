/* C interface of the semantic max-mixture SLAM library.
 *
 * All heap objects are opaque handles created and destroyed here; every
 * fallible call returns smm_status and leaves a human-readable message in
 * smm_last_error() (thread-local, valid until the next failing call on the
 * same thread). Status values match the CLI exit codes.
 */
#ifndef SEMSLAM_H
#define SEMSLAM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SEMSLAM_API __declspec(dllexport)
#else
#define SEMSLAM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum smm_status {
    SMM_OK = 0,
    SMM_USAGE_ERROR = 1,
    SMM_DATA_ERROR = 2,
    SMM_NUMERIC_ERROR = 3
} smm_status;

typedef struct smm_dataset smm_dataset;
typedef struct smm_result smm_result;

/* ---- simulation ------------------------------------------------------- */

typedef struct smm_sim_options {
    uint64_t seed;
    int num_landmarks;
    int num_classes;
    double odom_scale;
    double misclass_rate;
    double arena_half_width;
    int laps;
    double step_length;
    double min_range;
    double max_range;
    double fov;
    double range_sigma;
    double bearing_sigma;
} smm_sim_options;

SEMSLAM_API void smm_sim_options_init(smm_sim_options* options);
SEMSLAM_API smm_status smm_simulate(const smm_sim_options* options, smm_dataset** out);

/* ---- datasets ---------------------------------------------------------- */

SEMSLAM_API smm_status smm_dataset_load(const char* path, smm_dataset** out);
SEMSLAM_API smm_status smm_dataset_save(const smm_dataset* dataset, const char* path);
SEMSLAM_API int smm_dataset_num_keyframes(const smm_dataset* dataset);
SEMSLAM_API int smm_dataset_num_landmarks(const smm_dataset* dataset);
SEMSLAM_API void smm_dataset_free(smm_dataset* dataset);

/* ---- runs --------------------------------------------------------------- */

typedef struct smm_run_options {
    const char* method; /* known | ml | gpda | mm | mm-nh */
    double gate_confidence;
    double null_weight;
    double null_sigma;
    int reoptimize_every;
} smm_run_options;

SEMSLAM_API void smm_run_options_init(smm_run_options* options);
SEMSLAM_API smm_status smm_run(const smm_dataset* dataset, const smm_run_options* options,
                               smm_result** out);

typedef struct smm_error_stats {
    double max_error;
    double mean_error;
    double median_error;
    double rmse;
} smm_error_stats;

SEMSLAM_API size_t smm_result_num_poses(const smm_result* result);
SEMSLAM_API smm_status smm_result_pose(const smm_result* result, size_t index, double* x,
                                       double* y, double* theta);
SEMSLAM_API size_t smm_result_num_landmarks(const smm_result* result);
SEMSLAM_API smm_status smm_result_trajectory_error(const smm_result* result,
                                                   const smm_dataset* dataset,
                                                   smm_error_stats* translation,
                                                   smm_error_stats* rotation);
/* Appends one JSON record; seed/odom_scale/misclass_rate annotate the record. */
SEMSLAM_API smm_status smm_result_write_summary(const smm_result* result,
                                                const smm_dataset* dataset, uint64_t seed,
                                                double odom_scale, double misclass_rate,
                                                const char* jsonl_path);
SEMSLAM_API smm_status smm_result_write_trajectory(const smm_result* result,
                                                   const smm_dataset* dataset,
                                                   const char* csv_path);
SEMSLAM_API void smm_result_free(smm_result* result);

/* ---- sweeps ------------------------------------------------------------- */

typedef struct smm_sweep_options {
    smm_sim_options sim; /* base world; seed/scale/rate are set per cell */
    const char* methods; /* comma-separated method names */
    const double* odom_scales;
    size_t num_odom_scales;
    const double* misclass_rates;
    size_t num_misclass_rates;
    int num_seeds;
    int num_threads; /* <= 0: hardware concurrency */
    smm_run_options run;
} smm_sweep_options;

SEMSLAM_API void smm_sweep_options_init(smm_sweep_options* options);
SEMSLAM_API smm_status smm_sweep(const smm_sweep_options* options, const char* out_path);

/* ---- evaluation --------------------------------------------------------- */

SEMSLAM_API smm_status smm_eval_files(const char* estimate_csv, const char* reference_dataset,
                                      smm_error_stats* translation, smm_error_stats* rotation);

SEMSLAM_API const char* smm_last_error(void);
SEMSLAM_API const char* smm_version(void);

#ifdef __cplusplus
}
#endif

#endif /* SEMSLAM_H */
