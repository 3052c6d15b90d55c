#include "semslam/semslam.h"

#include <cstring>
#include <exception>
#include <sstream>
#include <string>

#include "semslam/errors.hpp"
#include "semslam/evalio.hpp"
#include "semslam/pipeline.hpp"
#include "semslam/simulator.hpp"
#include "semslam/sweep.hpp"

namespace {

thread_local std::string g_last_error;

smm_status status_from(const semslam::Error& error) {
    switch (error.code()) {
        case semslam::ErrorCode::DomainError:
            return SMM_USAGE_ERROR;
        case semslam::ErrorCode::ParseError:
        case semslam::ErrorCode::IoError:
        case semslam::ErrorCode::LengthMismatch:
            return SMM_DATA_ERROR;
        case semslam::ErrorCode::CoincidentPoint:
        case semslam::ErrorCode::NotPositiveDefinite:
        case semslam::ErrorCode::SingularSystem:
        case semslam::ErrorCode::MissingVariable:
            return SMM_NUMERIC_ERROR;
    }
    return SMM_NUMERIC_ERROR;
}

template <typename Fn>
smm_status guarded(Fn&& fn) {
    try {
        fn();
        return SMM_OK;
    } catch (const semslam::Error& error) {
        g_last_error = error.what();
        return status_from(error);
    } catch (const std::exception& error) {
        g_last_error = error.what();
        return SMM_NUMERIC_ERROR;
    }
}

smm_status invalid_argument(const char* message) {
    g_last_error = message;
    return SMM_USAGE_ERROR;
}

semslam::SimConfig to_sim_config(const smm_sim_options& options) {
    semslam::SimConfig config;
    config.seed = options.seed;
    config.num_landmarks = options.num_landmarks;
    config.num_classes = options.num_classes;
    config.odom_scale = options.odom_scale;
    config.misclass_rate = options.misclass_rate;
    config.arena_half_width = options.arena_half_width;
    config.trajectory.laps = options.laps;
    config.trajectory.step_length = options.step_length;
    config.sensor.min_range = options.min_range;
    config.sensor.max_range = options.max_range;
    config.sensor.fov = options.fov;
    config.sensor.range_sigma = options.range_sigma;
    config.sensor.bearing_sigma = options.bearing_sigma;
    return config;
}

semslam::PipelineConfig to_pipeline_config(const smm_run_options& options) {
    semslam::PipelineConfig config;
    config.gate_confidence = options.gate_confidence;
    config.null_weight = options.null_weight;
    config.null_sigma = options.null_sigma;
    config.reoptimize_every = options.reoptimize_every;
    return config;
}

void stats_out(const semslam::ErrorStats& stats, smm_error_stats* out) {
    out->max_error = stats.max;
    out->mean_error = stats.mean;
    out->median_error = stats.median;
    out->rmse = stats.rmse;
}

}  // namespace

struct smm_dataset {
    semslam::Dataset dataset;
};

struct smm_result {
    semslam::RunResult result;
};

extern "C" {

void smm_sim_options_init(smm_sim_options* options) {
    const semslam::SimConfig defaults;
    options->seed = defaults.seed;
    options->num_landmarks = defaults.num_landmarks;
    options->num_classes = defaults.num_classes;
    options->odom_scale = defaults.odom_scale;
    options->misclass_rate = defaults.misclass_rate;
    options->arena_half_width = defaults.arena_half_width;
    options->laps = defaults.trajectory.laps;
    options->step_length = defaults.trajectory.step_length;
    options->min_range = defaults.sensor.min_range;
    options->max_range = defaults.sensor.max_range;
    options->fov = defaults.sensor.fov;
    options->range_sigma = defaults.sensor.range_sigma;
    options->bearing_sigma = defaults.sensor.bearing_sigma;
}

smm_status smm_simulate(const smm_sim_options* options, smm_dataset** out) {
    if (options == nullptr || out == nullptr) {
        return invalid_argument("smm_simulate: null argument");
    }
    return guarded([&] {
        const semslam::SimConfig config = to_sim_config(*options);
        auto* handle = new smm_dataset{semslam::simulate(semslam::generate_world(config), config)};
        *out = handle;
    });
}

smm_status smm_dataset_load(const char* path, smm_dataset** out) {
    if (path == nullptr || out == nullptr) {
        return invalid_argument("smm_dataset_load: null argument");
    }
    return guarded([&] { *out = new smm_dataset{semslam::load_dataset(path)}; });
}

smm_status smm_dataset_save(const smm_dataset* dataset, const char* path) {
    if (dataset == nullptr || path == nullptr) {
        return invalid_argument("smm_dataset_save: null argument");
    }
    return guarded([&] { semslam::save_dataset(dataset->dataset, path); });
}

int smm_dataset_num_keyframes(const smm_dataset* dataset) {
    return dataset == nullptr ? 0 : static_cast<int>(dataset->dataset.keyframes.size());
}

int smm_dataset_num_landmarks(const smm_dataset* dataset) {
    return dataset == nullptr ? 0
                              : static_cast<int>(dataset->dataset.ground_truth_landmarks.size());
}

void smm_dataset_free(smm_dataset* dataset) {
    delete dataset;
}

void smm_run_options_init(smm_run_options* options) {
    const semslam::PipelineConfig defaults;
    options->method = "mm-nh";
    options->gate_confidence = defaults.gate_confidence;
    options->null_weight = defaults.null_weight;
    options->null_sigma = defaults.null_sigma;
    options->reoptimize_every = defaults.reoptimize_every;
}

smm_status smm_run(const smm_dataset* dataset, const smm_run_options* options, smm_result** out) {
    if (dataset == nullptr || options == nullptr || options->method == nullptr || out == nullptr) {
        return invalid_argument("smm_run: null argument");
    }
    return guarded([&] {
        const semslam::MethodKind method = semslam::method_from_string(options->method);
        *out = new smm_result{
            semslam::run(dataset->dataset, method, to_pipeline_config(*options))};
    });
}

size_t smm_result_num_poses(const smm_result* result) {
    return result == nullptr ? 0 : result->result.trajectory.size();
}

smm_status smm_result_pose(const smm_result* result, size_t index, double* x, double* y,
                           double* theta) {
    if (result == nullptr || index >= result->result.trajectory.size()) {
        return invalid_argument("smm_result_pose: index out of range");
    }
    const semslam::Pose2& pose = result->result.trajectory[index];
    if (x != nullptr) *x = pose.x;
    if (y != nullptr) *y = pose.y;
    if (theta != nullptr) *theta = pose.theta;
    return SMM_OK;
}

size_t smm_result_num_landmarks(const smm_result* result) {
    return result == nullptr ? 0 : result->result.landmarks.size();
}

smm_status smm_result_trajectory_error(const smm_result* result, const smm_dataset* dataset,
                                       smm_error_stats* translation, smm_error_stats* rotation) {
    if (result == nullptr || dataset == nullptr) {
        return invalid_argument("smm_result_trajectory_error: null argument");
    }
    return guarded([&] {
        auto [trans, rot] = semslam::trajectory_error(result->result.trajectory,
                                                      dataset->dataset.ground_truth_poses);
        if (translation != nullptr) stats_out(trans, translation);
        if (rotation != nullptr) stats_out(rot, rotation);
    });
}

smm_status smm_result_write_summary(const smm_result* result, const smm_dataset* dataset,
                                    uint64_t seed, double odom_scale, double misclass_rate,
                                    const char* jsonl_path) {
    if (result == nullptr || dataset == nullptr || jsonl_path == nullptr) {
        return invalid_argument("smm_result_write_summary: null argument");
    }
    return guarded([&] {
        const semslam::RunSummary summary = semslam::summarize_run(
            result->result, dataset->dataset, seed, odom_scale, misclass_rate);
        semslam::append_jsonl(jsonl_path, semslam::summary_to_json(summary));
    });
}

smm_status smm_result_write_trajectory(const smm_result* result, const smm_dataset* dataset,
                                       const char* csv_path) {
    if (result == nullptr || dataset == nullptr || csv_path == nullptr) {
        return invalid_argument("smm_result_write_trajectory: null argument");
    }
    return guarded(
        [&] { semslam::write_trajectory_csv(csv_path, result->result, dataset->dataset); });
}

void smm_result_free(smm_result* result) {
    delete result;
}

void smm_sweep_options_init(smm_sweep_options* options) {
    smm_sim_options_init(&options->sim);
    options->methods = "mm-nh";
    options->odom_scales = nullptr;
    options->num_odom_scales = 0;
    options->misclass_rates = nullptr;
    options->num_misclass_rates = 0;
    options->num_seeds = 20;
    options->num_threads = 0;
    smm_run_options_init(&options->run);
}

smm_status smm_sweep(const smm_sweep_options* options, const char* out_path) {
    if (options == nullptr || options->methods == nullptr || out_path == nullptr) {
        return invalid_argument("smm_sweep: null argument");
    }
    if (options->num_odom_scales == 0 || options->num_misclass_rates == 0 ||
        options->num_seeds <= 0) {
        return invalid_argument("smm_sweep: empty sweep grid");
    }
    return guarded([&] {
        semslam::SweepConfig config;
        config.base_sim = to_sim_config(options->sim);
        config.methods.clear();
        std::stringstream names(options->methods);
        std::string name;
        while (std::getline(names, name, ',')) {
            if (!name.empty()) {
                config.methods.push_back(semslam::method_from_string(name));
            }
        }
        if (config.methods.empty()) {
            semslam::raise(semslam::ErrorCode::DomainError, "smm_sweep: no methods given");
        }
        config.odom_scales.assign(options->odom_scales,
                                  options->odom_scales + options->num_odom_scales);
        config.misclass_rates.assign(options->misclass_rates,
                                     options->misclass_rates + options->num_misclass_rates);
        config.num_seeds = options->num_seeds;
        config.num_threads = options->num_threads;
        config.pipeline = to_pipeline_config(options->run);
        semslam::run_sweep(config, out_path);
    });
}

smm_status smm_eval_files(const char* estimate_csv, const char* reference_dataset,
                          smm_error_stats* translation, smm_error_stats* rotation) {
    if (estimate_csv == nullptr || reference_dataset == nullptr) {
        return invalid_argument("smm_eval_files: null argument");
    }
    return guarded([&] {
        const std::vector<semslam::Pose2> estimate = semslam::read_trajectory_csv(estimate_csv);
        const semslam::Dataset dataset = semslam::load_dataset(reference_dataset);
        if (!dataset.has_ground_truth_poses()) {
            semslam::raise(semslam::ErrorCode::ParseError,
                           "reference dataset has no POSE_GT records");
        }
        auto [trans, rot] =
            semslam::trajectory_error(estimate, dataset.ground_truth_poses);
        if (translation != nullptr) stats_out(trans, translation);
        if (rotation != nullptr) stats_out(rot, rotation);
    });
}

const char* smm_last_error(void) {
    return g_last_error.c_str();
}

const char* smm_version(void) {
    return "0.1.0";
}

}  // extern "C"
