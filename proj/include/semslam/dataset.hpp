#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "semslam/association.hpp"
#include "semslam/geometry.hpp"

namespace semslam {

/// One landmark observation as stored in a dataset. true_landmark_id is -1
/// when ground truth is absent.
struct Detection {
    double range{0.0};
    double bearing{0.0};
    int detected_class{0};
    int true_landmark_id{-1};
};

/// One pipeline step: an odometry increment (robot frame of the previous
/// pose) with its covariance, plus the detections made at the new pose.
struct Keyframe {
    int time{0};
    Pose2 odometry;
    Eigen::Matrix3d odometry_cov{Eigen::Matrix3d::Identity()};
    std::vector<Detection> detections;
};

struct GroundTruthLandmark {
    int id{0};
    Point2 position{0.0, 0.0};
    int true_class{0};
};

struct Dataset {
    int num_classes{2};
    ConfusionMatrix confusion{ConfusionMatrix::symmetric(2, 0.0)};
    Eigen::Matrix2d gamma{Eigen::Matrix2d::Identity()};

    /// Optional ground truth: poses indexed 0..T (one more than keyframes),
    /// landmarks referenced by Detection::true_landmark_id.
    std::vector<Pose2> ground_truth_poses;
    std::vector<GroundTruthLandmark> ground_truth_landmarks;

    std::vector<Keyframe> keyframes;

    bool has_ground_truth_poses() const { return !ground_truth_poses.empty(); }
};

}  // namespace semslam
