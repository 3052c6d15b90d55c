#pragma once

#include <cstdint>
#include <vector>

#include "semslam/dataset.hpp"
#include "semslam/geometry.hpp"

namespace semslam {

struct TrajectoryConfig {
    int laps{2};
    double step_length{0.47};
};

struct SensorConfig {
    double min_range{0.5};
    double max_range{5.0};
    double fov{2.0 * kPi / 3.0};
    double range_sigma{0.1};
    double bearing_sigma{0.05};
};

/// Per-step odometry noise standard deviations in the robot frame; the
/// effective sigma of each axis is the base value times odom_scale.
struct OdomSigmas {
    double x{1.5e-3};
    double y{0.75e-3};
    double yaw{2.25e-3};
};

struct SimConfig {
    std::uint64_t seed{0};
    int num_landmarks{60};
    int num_classes{2};
    /// Landmarks are placed uniformly in the square [-a, a]^2.
    double arena_half_width{10.0};
    TrajectoryConfig trajectory;
    SensorConfig sensor;
    OdomSigmas odom_base;
    double odom_scale{1.0};
    double misclass_rate{0.0};

    void validate() const;
};

struct GroundTruth {
    std::vector<Pose2> poses;
    std::vector<GroundTruthLandmark> landmarks;
};

/// Deterministic synthetic world: uniform landmarks with uniform classes and
/// a closed circular loop trajectory that revisits its start every lap.
GroundTruth generate_world(const SimConfig& config);

/// Applies the noise protocol to the ground truth: odometry increments with
/// per-axis Gaussian noise scaled by odom_scale, range/bearing detections for
/// landmarks inside range/FOV limits, detected classes sampled through the
/// misclassification confusion matrix. Every detection carries its true
/// landmark id.
Dataset simulate(const GroundTruth& truth, const SimConfig& config);

}  // namespace semslam
