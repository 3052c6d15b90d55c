#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "semslam/association.hpp"
#include "semslam/dataset.hpp"
#include "semslam/factor_graph.hpp"

namespace semslam {

enum class MethodKind { KnownDA, MaxLikelihood, GPDA, MaxMixture, MaxMixtureNull };

/// Parses the CLI spelling: known | ml | gpda | mm | mm-nh.
MethodKind method_from_string(std::string_view name);
std::string method_to_string(MethodKind method);

struct PipelineConfig {
    double gate_confidence{0.9};
    double null_weight{0.1};
    double null_sigma{1e5};
    /// Re-optimize after every k-th keyframe (1 = every step).
    int reoptimize_every{1};
    OptimizerConfig optimizer;
};

/// Map entry bookkeeping for one landmark variable.
struct LandmarkRecord {
    int id{0};
    ClassBelief belief;
    int created_at_step{0};
    int created_by_true_id{-1};
    /// Detections attributed to this landmark (creation, committed plain
    /// factors, or top-weight mixture membership).
    int num_observations{0};
};

/// Per-detection decision record. final_landmark is resolved once the run
/// finishes: the committed landmark for plain methods, the argmax-weight
/// candidate for GPDA, the selected mixture component for MM variants
/// (-1 when the null hypothesis is selected).
struct MeasurementLog {
    int step{0};
    int detection_index{0};
    double range{0.0};
    double bearing{0.0};
    int detected_class{0};
    HypothesisSet hypotheses;
    int true_landmark_id{-1};
    bool true_landmark_in_map{false};
    bool created_landmark{false};
    int action_landmark{-1};
    int mixture_factor_index{-1};
    int final_landmark{-1};
};

/// GPDA bookkeeping: the weighted surrogate factors of one detection, kept so
/// the E step can recompute their weights.
struct GpdaGroup {
    VariableId pose;
    std::vector<std::size_t> factor_indices;
    std::vector<int> landmark_ids;
    std::vector<double> weights;
    SemanticMeasurement measurement;
    std::size_t log_index{0};
};

struct SlamState {
    MethodKind method{MethodKind::MaxMixtureNull};
    PipelineConfig config;
    ConfusionMatrix confusion{ConfusionMatrix::symmetric(2, 0.0)};
    Eigen::Matrix2d gamma{Eigen::Matrix2d::Identity()};
    FactorGraph graph;
    Values values;
    std::vector<LandmarkRecord> landmarks;
    std::map<int, int> true_to_landmark;
    std::vector<MeasurementLog> logs;
    std::vector<OptStats> step_stats;
    std::vector<GpdaGroup> gpda_groups;
    int current_pose{0};
    int steps_since_optimize{0};
};

/// Anchors the first pose with a tight prior (gauge fixing) at the dataset's
/// first ground-truth pose when available, identity otherwise.
SlamState make_initial_state(const Dataset& dataset, MethodKind method,
                             const PipelineConfig& config);

/// Appends the keyframe's pose, decides every detection's association per the
/// state's method, and re-optimizes when due.
void step(SlamState& state, const Keyframe& keyframe);

/// EM refinement of the GPDA surrogate: recompute association weights at the
/// current estimate, rescale the surrogate factor covariances, re-optimize;
/// stops when the weight change max-norm drops below 1e-3 or after 10 rounds.
void gpda_refine(SlamState& state);

struct LandmarkEstimate {
    int id{0};
    Point2 position{0.0, 0.0};
    int map_class{0};
    int true_id{-1};
    int created_at_step{0};
    int num_observations{0};
};

struct RunResult {
    MethodKind method{MethodKind::MaxMixtureNull};
    std::vector<Pose2> trajectory;
    std::vector<LandmarkEstimate> landmarks;
    std::vector<MeasurementLog> logs;
    std::vector<OptStats> step_stats;
    double final_objective{0.0};
    double runtime_sec{0.0};
};

/// Resolves final associations against the final estimate and packages the
/// run; leaves the state usable for inspection.
RunResult finalize(SlamState& state);

/// Folds step over all keyframes. Deterministic given (dataset, method,
/// config).
RunResult run(const Dataset& dataset, MethodKind method, const PipelineConfig& config = {});

/// Inverse measurement: the world position implied by observing
/// (range, bearing) from `pose`.
Point2 landmark_from_measurement(const Pose2& pose, double range, double bearing);

}  // namespace semslam
