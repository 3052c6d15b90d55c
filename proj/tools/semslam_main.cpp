// Command-line front end; talks to the engine exclusively through the C API.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semslam/semslam.h"

namespace {

int fail(smm_status status) {
    std::fprintf(stderr, "error: %s\n", smm_last_error());
    return static_cast<int>(status);
}

void print_stats_table(const smm_error_stats& translation, const smm_error_stats& rotation) {
    std::printf("%-16s %12s %12s %14s %10s\n", "", "Max Error", "Mean Error", "Median Error",
                "RMSE");
    std::printf("%-16s %12.4f %12.4f %14.4f %10.4f\n", "Translation (m)", translation.max_error,
                translation.mean_error, translation.median_error, translation.rmse);
    std::printf("%-16s %12.4f %12.4f %14.4f %10.4f\n", "Rotation (rad)", rotation.max_error,
                rotation.mean_error, rotation.median_error, rotation.rmse);
}

struct SimFlags {
    smm_sim_options options;

    void add_to(CLI::App& cmd) {
        smm_sim_options_init(&options);
        cmd.add_option("--seed", options.seed, "Random seed");
        cmd.add_option("--landmarks", options.num_landmarks, "Number of landmarks");
        cmd.add_option("--classes", options.num_classes, "Number of semantic classes");
        cmd.add_option("--odom-scale", options.odom_scale, "Odometry noise scale factor");
        cmd.add_option("--misclass-rate", options.misclass_rate, "Misclassification rate alpha");
        cmd.add_option("--arena", options.arena_half_width, "Arena half-width in meters");
        cmd.add_option("--laps", options.laps, "Trajectory loop laps");
        cmd.add_option("--step-length", options.step_length, "Trajectory step length (m)");
        cmd.add_option("--min-range", options.min_range, "Sensor min range (m)");
        cmd.add_option("--max-range", options.max_range, "Sensor max range (m)");
        cmd.add_option("--fov", options.fov, "Sensor field of view (rad)");
        cmd.add_option("--range-sigma", options.range_sigma, "Range noise sigma (m)");
        cmd.add_option("--bearing-sigma", options.bearing_sigma, "Bearing noise sigma (rad)");
    }
};

struct RunFlags {
    smm_run_options options;
    std::string method{"mm-nh"};

    void add_to(CLI::App& cmd) {
        smm_run_options_init(&options);
        cmd.add_option("--method", method, "known | ml | gpda | mm | mm-nh");
        cmd.add_option("--gate-confidence", options.gate_confidence,
                       "Chi-square gate confidence");
        cmd.add_option("--null-weight", options.null_weight, "Null-hypothesis weight (mm-nh)");
        cmd.add_option("--null-sigma", options.null_sigma, "Null-hypothesis sigma");
        cmd.add_option("--reoptimize-every", options.reoptimize_every,
                       "Re-optimize every k-th keyframe");
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic max-mixture SLAM engine"};
    app.require_subcommand(1);

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
    SimFlags sim_flags;
    sim_flags.add_to(*simulate_cmd);
    std::string sim_out;
    simulate_cmd->add_option("--out", sim_out, "Output dataset path")->required();

    // run
    auto* run_cmd = app.add_subcommand("run", "Run one method on a dataset");
    std::string run_dataset;
    run_cmd->add_option("--dataset", run_dataset, "Input dataset path")->required();
    RunFlags run_flags;
    run_flags.add_to(*run_cmd);
    std::string run_out;
    std::string run_traj_out;
    std::uint64_t run_seed = 0;
    double run_odom_scale = 0.0;
    double run_misclass_rate = 0.0;
    run_cmd->add_option("--out", run_out, "Append a JSON result record here");
    run_cmd->add_option("--traj-out", run_traj_out, "Write the estimated trajectory CSV here");
    run_cmd->add_option("--record-seed", run_seed, "Seed annotated into the result record");
    run_cmd->add_option("--record-odom-scale", run_odom_scale,
                        "Odometry scale annotated into the result record");
    run_cmd->add_option("--record-misclass-rate", run_misclass_rate,
                        "Misclassification rate annotated into the result record");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a methods x noise x seeds grid");
    SimFlags sweep_sim_flags;
    sweep_sim_flags.add_to(*sweep_cmd);
    RunFlags sweep_run_flags;
    smm_run_options_init(&sweep_run_flags.options);
    sweep_cmd->add_option("--gate-confidence", sweep_run_flags.options.gate_confidence,
                          "Chi-square gate confidence");
    sweep_cmd->add_option("--null-weight", sweep_run_flags.options.null_weight,
                          "Null-hypothesis weight (mm-nh)");
    sweep_cmd->add_option("--null-sigma", sweep_run_flags.options.null_sigma,
                          "Null-hypothesis sigma");
    std::vector<std::string> sweep_methods{"mm-nh"};
    std::vector<double> sweep_scales{1.0};
    std::vector<double> sweep_rates{0.1};
    int sweep_seeds = 20;
    int sweep_threads = 0;
    std::string sweep_out;
    sweep_cmd->add_option("--methods", sweep_methods, "Methods to compare")->delimiter(',');
    sweep_cmd->add_option("--odom-scales", sweep_scales, "Odometry noise scales")->delimiter(',');
    sweep_cmd->add_option("--misclass-rates", sweep_rates, "Misclassification rates")
        ->delimiter(',');
    sweep_cmd->add_option("--seeds", sweep_seeds, "Seeds per cell");
    sweep_cmd->add_option("--threads", sweep_threads, "Worker threads (0 = all cores)");
    sweep_cmd->add_option("--out", sweep_out, "Output JSONL path")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Trajectory error of an estimate vs. reference");
    std::string eval_est;
    std::string eval_ref;
    eval_cmd->add_option("--est", eval_est, "Estimated trajectory CSV")->required();
    eval_cmd->add_option("--ref", eval_ref, "Reference dataset with POSE_GT records")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        app.exit(e);
        return static_cast<int>(SMM_USAGE_ERROR);
    }

    if (simulate_cmd->parsed()) {
        smm_dataset* dataset = nullptr;
        smm_status status = smm_simulate(&sim_flags.options, &dataset);
        if (status != SMM_OK) return fail(status);
        status = smm_dataset_save(dataset, sim_out.c_str());
        if (status != SMM_OK) {
            smm_dataset_free(dataset);
            return fail(status);
        }
        std::printf("wrote %s (%d keyframes, %d landmarks)\n", sim_out.c_str(),
                    smm_dataset_num_keyframes(dataset), smm_dataset_num_landmarks(dataset));
        smm_dataset_free(dataset);
        return 0;
    }

    if (run_cmd->parsed()) {
        smm_dataset* dataset = nullptr;
        smm_status status = smm_dataset_load(run_dataset.c_str(), &dataset);
        if (status != SMM_OK) return fail(status);
        run_flags.options.method = run_flags.method.c_str();
        smm_result* result = nullptr;
        status = smm_run(dataset, &run_flags.options, &result);
        if (status != SMM_OK) {
            smm_dataset_free(dataset);
            return fail(status);
        }
        std::printf("method %s: %zu poses, %zu landmarks\n", run_flags.method.c_str(),
                    smm_result_num_poses(result), smm_result_num_landmarks(result));
        smm_error_stats translation;
        smm_error_stats rotation;
        if (smm_result_trajectory_error(result, dataset, &translation, &rotation) == SMM_OK) {
            print_stats_table(translation, rotation);
        }
        if (!run_out.empty()) {
            status = smm_result_write_summary(result, dataset, run_seed, run_odom_scale,
                                              run_misclass_rate, run_out.c_str());
        }
        if (status == SMM_OK && !run_traj_out.empty()) {
            status = smm_result_write_trajectory(result, dataset, run_traj_out.c_str());
        }
        smm_result_free(result);
        smm_dataset_free(dataset);
        return status == SMM_OK ? 0 : fail(status);
    }

    if (sweep_cmd->parsed()) {
        smm_sweep_options options;
        smm_sweep_options_init(&options);
        options.sim = sweep_sim_flags.options;
        std::string methods_csv;
        for (std::size_t i = 0; i < sweep_methods.size(); ++i) {
            if (i > 0) methods_csv += ',';
            methods_csv += sweep_methods[i];
        }
        options.methods = methods_csv.c_str();
        options.odom_scales = sweep_scales.data();
        options.num_odom_scales = sweep_scales.size();
        options.misclass_rates = sweep_rates.data();
        options.num_misclass_rates = sweep_rates.size();
        options.num_seeds = sweep_seeds;
        options.num_threads = sweep_threads;
        options.run = sweep_run_flags.options;
        const smm_status status = smm_sweep(&options, sweep_out.c_str());
        if (status != SMM_OK) return fail(status);
        std::printf("sweep written to %s\n", sweep_out.c_str());
        return 0;
    }

    if (eval_cmd->parsed()) {
        smm_error_stats translation;
        smm_error_stats rotation;
        const smm_status status =
            smm_eval_files(eval_est.c_str(), eval_ref.c_str(), &translation, &rotation);
        if (status != SMM_OK) return fail(status);
        print_stats_table(translation, rotation);
        return 0;
    }

    return static_cast<int>(SMM_USAGE_ERROR);
}
