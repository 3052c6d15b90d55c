#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semslam/dataset.hpp"
#include "semslam/pipeline.hpp"

namespace semslam {

/// Aggregate per-pose error statistics (meters for translation, radians for
/// rotation).
struct ErrorStats {
    double max{0.0};
    double mean{0.0};
    double median{0.0};
    double rmse{0.0};

    static ErrorStats from_samples(std::vector<double> samples);
};

enum class AlignMode {
    /// Rigidly move the estimate so its first pose coincides with the
    /// reference's first pose. The default, matching origin-aligned reporting.
    Origin,
    /// Least-squares rigid alignment over all positions; offered for
    /// comparison only.
    Umeyama,
};

/// Per-pose translation distance and absolute wrapped heading difference
/// after alignment.
std::pair<ErrorStats, ErrorStats> trajectory_error(std::span<const Pose2> estimate,
                                                   std::span<const Pose2> reference,
                                                   AlignMode align = AlignMode::Origin);

/// Line-oriented text dataset format. Numbers are written with 17 significant
/// digits so parse(serialize(d)) == d exactly.
///
///   HEADER C <C> CONFUSION <C*C row-major> GAMMA <4 row-major>
///   LANDMARK_GT <j> <x> <y> <class>
///   POSE_GT <t> <x> <y> <theta>
///   ODOM <t> <dx> <dy> <dtheta> <6 upper-triangular cov entries>
///   DET <t> <k> <range> <bearing> <class> <true_landmark_id|-1>
Dataset parse_dataset(std::istream& input);
Dataset parse_dataset_string(const std::string& text);
std::string serialize_dataset(const Dataset& dataset);

Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& dataset, const std::string& path);

/// Association and classification quality of one run against ground truth.
struct AssociationMetrics {
    double accuracy{0.0};
    double precision{0.0};
    double recall{0.0};
    int total_detections{0};
    int correct{0};
};

AssociationMetrics association_metrics(const RunResult& result);

/// Fraction of landmarks (with known true id and at least min_observations)
/// whose MAP class matches the true class. Returns -1 when no landmark
/// qualifies.
double class_accuracy(const RunResult& result, const Dataset& dataset, int min_observations = 0);

/// One machine-readable record per run, written as a JSON line.
struct RunSummary {
    std::string method;
    std::uint64_t seed{0};
    double odom_scale{0.0};
    double misclass_rate{0.0};
    ErrorStats translation;
    ErrorStats rotation;
    AssociationMetrics association;
    double class_acc{0.0};
    int num_landmarks{0};
    int num_true_landmarks{0};
    int num_poses{0};
    double runtime_sec{0.0};
};

RunSummary summarize_run(const RunResult& result, const Dataset& dataset, std::uint64_t seed = 0,
                         double odom_scale = 0.0, double misclass_rate = 0.0);

std::string summary_to_json(const RunSummary& summary);

/// Appends whole lines; concurrent writers must hold their own lock.
void append_jsonl(const std::string& path, const std::string& line);

/// Estimated trajectory with ground truth columns when available:
/// t,x,y,theta[,gt_x,gt_y,gt_theta].
void write_trajectory_csv(const std::string& path, const RunResult& result,
                          const Dataset& dataset);
std::vector<Pose2> read_trajectory_csv(const std::string& path);

}  // namespace semslam
