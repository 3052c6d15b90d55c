#include "semslam/simulator.hpp"

#include <cmath>

#include "semslam/errors.hpp"
#include "semslam/rng.hpp"

namespace semslam {

void SimConfig::validate() const {
    if (num_landmarks < 0 || num_classes < 2 || arena_half_width <= 0.0) {
        raise(ErrorCode::DomainError, "SimConfig: invalid world parameters");
    }
    if (misclass_rate < 0.0 || misclass_rate > 0.5) {
        raise(ErrorCode::DomainError, "SimConfig: misclass_rate outside [0, 0.5]");
    }
    if (odom_scale < 0.0) {
        raise(ErrorCode::DomainError, "SimConfig: odom_scale must be >= 0");
    }
    if (trajectory.laps < 1 || trajectory.step_length <= 0.0) {
        raise(ErrorCode::DomainError, "SimConfig: invalid trajectory parameters");
    }
    if (sensor.max_range <= 0.0 || sensor.min_range < 0.0 ||
        sensor.min_range >= sensor.max_range || sensor.fov <= 0.0 ||
        sensor.range_sigma <= 0.0 || sensor.bearing_sigma <= 0.0) {
        raise(ErrorCode::DomainError, "SimConfig: invalid sensor parameters");
    }
}

GroundTruth generate_world(const SimConfig& config) {
    config.validate();
    GroundTruth truth;

    truth.landmarks.reserve(static_cast<std::size_t>(config.num_landmarks));
    for (int j = 0; j < config.num_landmarks; ++j) {
        CounterRng rng(config.seed, rng_stream::kWorldLandmark, static_cast<std::uint64_t>(j));
        GroundTruthLandmark landmark;
        landmark.id = j;
        landmark.position.x() = (2.0 * rng.next_uniform() - 1.0) * config.arena_half_width;
        landmark.position.y() = (2.0 * rng.next_uniform() - 1.0) * config.arena_half_width;
        landmark.true_class =
            std::min(static_cast<int>(rng.next_uniform() * config.num_classes),
                     config.num_classes - 1);
        truth.landmarks.push_back(landmark);
    }

    // Closed circular loop; full laps return exactly to the start.
    const double radius = 0.75 * config.arena_half_width;
    const int steps_per_lap = std::max(
        8, static_cast<int>(std::lround(2.0 * kPi * radius / config.trajectory.step_length)));
    const int total_steps = steps_per_lap * config.trajectory.laps;
    truth.poses.reserve(static_cast<std::size_t>(total_steps) + 1);
    for (int t = 0; t <= total_steps; ++t) {
        const double angle = 2.0 * kPi * static_cast<double>(t % steps_per_lap) /
                             static_cast<double>(steps_per_lap);
        truth.poses.push_back({radius * std::cos(angle), radius * std::sin(angle),
                               wrap_angle(angle + kPi / 2.0)});
    }
    return truth;
}

namespace {

int sample_detected_class(int true_class, int num_classes, double alpha, CounterRng& rng) {
    const double u = rng.next_uniform();
    if (u < 1.0 - alpha || num_classes < 2 || alpha == 0.0) {
        return true_class;
    }
    // Remaining mass alpha split uniformly over the other C - 1 classes.
    int other = static_cast<int>((u - (1.0 - alpha)) / alpha * (num_classes - 1));
    other = std::min(other, num_classes - 2);
    return other >= true_class ? other + 1 : other;
}

}  // namespace

Dataset simulate(const GroundTruth& truth, const SimConfig& config) {
    config.validate();

    Dataset dataset;
    dataset.num_classes = config.num_classes;
    dataset.confusion = ConfusionMatrix::symmetric(config.num_classes, config.misclass_rate);
    dataset.gamma = Eigen::Vector2d(config.sensor.range_sigma * config.sensor.range_sigma,
                                    config.sensor.bearing_sigma * config.sensor.bearing_sigma)
                        .asDiagonal();
    dataset.ground_truth_poses = truth.poses;
    dataset.ground_truth_landmarks = truth.landmarks;

    // Zero odometry noise (scale 0) still needs a usable noise model; floor
    // the per-axis sigma so the factor covariance stays SPD.
    constexpr double kSigmaFloor = 1e-6;
    const double sx = std::max(config.odom_base.x * config.odom_scale, kSigmaFloor);
    const double sy = std::max(config.odom_base.y * config.odom_scale, kSigmaFloor);
    const double syaw = std::max(config.odom_base.yaw * config.odom_scale, kSigmaFloor);
    const Eigen::Matrix3d odom_cov =
        Eigen::Vector3d(sx * sx, sy * sy, syaw * syaw).asDiagonal();

    dataset.keyframes.reserve(truth.poses.size() - 1);
    for (std::size_t t = 1; t < truth.poses.size(); ++t) {
        Keyframe keyframe;
        keyframe.time = static_cast<int>(t);
        keyframe.odometry_cov = odom_cov;

        const Pose2 increment = se2_between(truth.poses[t - 1], truth.poses[t]);
        CounterRng odom_rng(config.seed, rng_stream::kOdometry, t);
        const double scale = config.odom_scale;
        keyframe.odometry = {
            increment.x + config.odom_base.x * scale * odom_rng.next_normal(),
            increment.y + config.odom_base.y * scale * odom_rng.next_normal(),
            wrap_angle(increment.theta + config.odom_base.yaw * scale * odom_rng.next_normal())};

        for (const GroundTruthLandmark& landmark : truth.landmarks) {
            const Eigen::Vector2d offset = landmark.position - truth.poses[t].translation();
            if (offset.norm() > config.sensor.max_range ||
                offset.norm() < config.sensor.min_range) {
                continue;
            }
            const RangeBearing true_measurement = range_bearing(truth.poses[t], landmark.position);
            if (std::abs(true_measurement.bearing) > 0.5 * config.sensor.fov) {
                continue;
            }
            CounterRng geo_rng(config.seed, rng_stream::kDetectionGeometry, t,
                               static_cast<std::uint64_t>(landmark.id));
            CounterRng class_rng(config.seed, rng_stream::kDetectionClass, t,
                                 static_cast<std::uint64_t>(landmark.id));
            Detection detection;
            detection.range = std::max(
                true_measurement.range + config.sensor.range_sigma * geo_rng.next_normal(), 1e-3);
            detection.bearing = wrap_angle(true_measurement.bearing +
                                           config.sensor.bearing_sigma * geo_rng.next_normal());
            detection.detected_class = sample_detected_class(
                landmark.true_class, config.num_classes, config.misclass_rate, class_rng);
            detection.true_landmark_id = landmark.id;
            keyframe.detections.push_back(detection);
        }
        dataset.keyframes.push_back(std::move(keyframe));
    }
    return dataset;
}

}  // namespace semslam
