#include "semslam/evalio.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semslam/errors.hpp"

namespace semslam {

ErrorStats ErrorStats::from_samples(std::vector<double> samples) {
    ErrorStats stats;
    if (samples.empty()) {
        return stats;
    }
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double s : samples) {
        stats.max = std::max(stats.max, s);
        sum += s;
        sum_sq += s * s;
    }
    const double n = static_cast<double>(samples.size());
    stats.mean = sum / n;
    stats.rmse = std::sqrt(sum_sq / n);
    std::sort(samples.begin(), samples.end());
    const std::size_t mid = samples.size() / 2;
    stats.median = samples.size() % 2 == 1 ? samples[mid]
                                           : 0.5 * (samples[mid - 1] + samples[mid]);
    return stats;
}

namespace {

Pose2 umeyama_alignment(std::span<const Pose2> estimate, std::span<const Pose2> reference) {
    Eigen::Vector2d mean_est = Eigen::Vector2d::Zero();
    Eigen::Vector2d mean_ref = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        mean_est += estimate[i].translation();
        mean_ref += reference[i].translation();
    }
    mean_est /= static_cast<double>(estimate.size());
    mean_ref /= static_cast<double>(estimate.size());

    Eigen::Matrix2d cross = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        cross += (reference[i].translation() - mean_ref) *
                 (estimate[i].translation() - mean_est).transpose();
    }
    // Planar Procrustes: rotation angle from the 2x2 cross-covariance.
    const double angle = std::atan2(cross(1, 0) - cross(0, 1), cross(0, 0) + cross(1, 1));
    Pose2 transform;
    transform.theta = wrap_angle(angle);
    const Eigen::Vector2d t = mean_ref - transform.rotation() * mean_est;
    transform.x = t.x();
    transform.y = t.y();
    return transform;
}

}  // namespace

std::pair<ErrorStats, ErrorStats> trajectory_error(std::span<const Pose2> estimate,
                                                   std::span<const Pose2> reference,
                                                   AlignMode align) {
    if (estimate.size() != reference.size()) {
        raise(ErrorCode::LengthMismatch, "trajectory_error: length mismatch");
    }
    if (estimate.empty()) {
        return {};
    }

    const Pose2 transform = align == AlignMode::Origin
                                ? se2_compose(reference[0], se2_inverse(estimate[0]))
                                : umeyama_alignment(estimate, reference);

    std::vector<double> translation_errors;
    std::vector<double> rotation_errors;
    translation_errors.reserve(estimate.size());
    rotation_errors.reserve(estimate.size());
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        const Pose2 aligned = se2_compose(transform, estimate[i]);
        translation_errors.push_back((aligned.translation() - reference[i].translation()).norm());
        rotation_errors.push_back(std::abs(wrap_angle(aligned.theta - reference[i].theta)));
    }
    return {ErrorStats::from_samples(std::move(translation_errors)),
            ErrorStats::from_samples(std::move(rotation_errors))};
}

namespace {

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

[[noreturn]] void parse_fail(int line_number, const std::string& reason) {
    raise(ErrorCode::ParseError, "line " + std::to_string(line_number) + ": " + reason);
}

double read_double(std::istringstream& in, int line_number, const char* what) {
    double value;
    if (!(in >> value)) {
        parse_fail(line_number, std::string("expected number for ") + what);
    }
    return value;
}

int read_int(std::istringstream& in, int line_number, const char* what) {
    int value;
    if (!(in >> value)) {
        parse_fail(line_number, std::string("expected integer for ") + what);
    }
    return value;
}

void require_spd(const Eigen::MatrixXd& cov, int line_number, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        parse_fail(line_number, std::string(what) + " covariance is not positive definite");
    }
}

}  // namespace

Dataset parse_dataset(std::istream& input) {
    Dataset dataset;
    bool saw_header = false;
    std::map<int, Keyframe> keyframes;
    std::set<int> landmark_ids;
    std::vector<std::tuple<int, int, Detection>> detections;  // (t, k, det)
    std::map<int, Pose2> poses_gt;

    std::string line;
    int line_number = 0;
    int last_odom_time = 0;
    while (std::getline(input, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream in(line);
        std::string tag;
        in >> tag;
        if (tag == "HEADER") {
            std::string key;
            in >> key;
            if (key != "C") parse_fail(line_number, "HEADER must start with C");
            const int num_classes = read_int(in, line_number, "C");
            if (num_classes < 2) parse_fail(line_number, "C must be >= 2");
            in >> key;
            if (key != "CONFUSION") parse_fail(line_number, "expected CONFUSION");
            Eigen::MatrixXd confusion(num_classes, num_classes);
            for (int i = 0; i < num_classes; ++i) {
                for (int j = 0; j < num_classes; ++j) {
                    confusion(i, j) = read_double(in, line_number, "confusion entry");
                }
            }
            in >> key;
            if (key != "GAMMA") parse_fail(line_number, "expected GAMMA");
            Eigen::Matrix2d gamma;
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    gamma(i, j) = read_double(in, line_number, "gamma entry");
                }
            }
            require_spd(gamma, line_number, "GAMMA");
            dataset.num_classes = num_classes;
            try {
                dataset.confusion = ConfusionMatrix(confusion);
            } catch (const Error& e) {
                parse_fail(line_number, e.what());
            }
            dataset.gamma = gamma;
            saw_header = true;
        } else if (tag == "LANDMARK_GT") {
            GroundTruthLandmark landmark;
            landmark.id = read_int(in, line_number, "landmark id");
            landmark.position.x() = read_double(in, line_number, "x");
            landmark.position.y() = read_double(in, line_number, "y");
            landmark.true_class = read_int(in, line_number, "class");
            dataset.ground_truth_landmarks.push_back(landmark);
            landmark_ids.insert(landmark.id);
        } else if (tag == "POSE_GT") {
            const int t = read_int(in, line_number, "t");
            Pose2 pose;
            pose.x = read_double(in, line_number, "x");
            pose.y = read_double(in, line_number, "y");
            pose.theta = read_double(in, line_number, "theta");
            poses_gt[t] = pose;
        } else if (tag == "ODOM") {
            const int t = read_int(in, line_number, "t");
            if (t <= last_odom_time) {
                parse_fail(line_number, "ODOM timestamps must be strictly increasing");
            }
            last_odom_time = t;
            Keyframe keyframe;
            keyframe.time = t;
            keyframe.odometry.x = read_double(in, line_number, "dx");
            keyframe.odometry.y = read_double(in, line_number, "dy");
            keyframe.odometry.theta = read_double(in, line_number, "dtheta");
            Eigen::Matrix3d cov;
            for (int i = 0; i < 3; ++i) {
                for (int j = i; j < 3; ++j) {
                    const double value = read_double(in, line_number, "cov entry");
                    cov(i, j) = value;
                    cov(j, i) = value;
                }
            }
            require_spd(cov, line_number, "ODOM");
            keyframe.odometry_cov = cov;
            keyframes[t] = std::move(keyframe);
        } else if (tag == "DET") {
            const int t = read_int(in, line_number, "t");
            const int k = read_int(in, line_number, "k");
            Detection detection;
            detection.range = read_double(in, line_number, "range");
            detection.bearing = read_double(in, line_number, "bearing");
            detection.detected_class = read_int(in, line_number, "class");
            detection.true_landmark_id = read_int(in, line_number, "true landmark id");
            if (detection.range <= 0.0) {
                parse_fail(line_number, "range must be positive");
            }
            detections.emplace_back(t, k, detection);
        } else {
            parse_fail(line_number, "unknown record tag '" + tag + "'");
        }
    }

    if (!saw_header && (!keyframes.empty() || !detections.empty())) {
        raise(ErrorCode::ParseError, "dataset has records but no HEADER line");
    }

    for (auto& [t, k, detection] : detections) {
        auto it = keyframes.find(t);
        if (it == keyframes.end()) {
            raise(ErrorCode::ParseError,
                  "DET references time " + std::to_string(t) + " with no ODOM record");
        }
        if (detection.true_landmark_id >= 0 && !landmark_ids.empty() &&
            landmark_ids.find(detection.true_landmark_id) == landmark_ids.end()) {
            raise(ErrorCode::ParseError, "DET references unknown landmark id " +
                                             std::to_string(detection.true_landmark_id));
        }
        it->second.detections.push_back(detection);
    }

    for (auto& [t, keyframe] : keyframes) {
        dataset.keyframes.push_back(std::move(keyframe));
    }
    for (auto& [t, pose] : poses_gt) {
        dataset.ground_truth_poses.push_back(pose);
    }
    return dataset;
}

Dataset parse_dataset_string(const std::string& text) {
    std::istringstream in(text);
    return parse_dataset(in);
}

std::string serialize_dataset(const Dataset& dataset) {
    std::ostringstream out;
    out << "HEADER C " << dataset.num_classes << " CONFUSION";
    for (int i = 0; i < dataset.num_classes; ++i) {
        for (int j = 0; j < dataset.num_classes; ++j) {
            out << ' ' << format_double(dataset.confusion(i, j));
        }
    }
    out << " GAMMA";
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            out << ' ' << format_double(dataset.gamma(i, j));
        }
    }
    out << '\n';

    for (const GroundTruthLandmark& landmark : dataset.ground_truth_landmarks) {
        out << "LANDMARK_GT " << landmark.id << ' ' << format_double(landmark.position.x()) << ' '
            << format_double(landmark.position.y()) << ' ' << landmark.true_class << '\n';
    }
    for (std::size_t t = 0; t < dataset.ground_truth_poses.size(); ++t) {
        const Pose2& pose = dataset.ground_truth_poses[t];
        out << "POSE_GT " << t << ' ' << format_double(pose.x) << ' ' << format_double(pose.y)
            << ' ' << format_double(pose.theta) << '\n';
    }
    for (const Keyframe& keyframe : dataset.keyframes) {
        out << "ODOM " << keyframe.time << ' ' << format_double(keyframe.odometry.x) << ' '
            << format_double(keyframe.odometry.y) << ' ' << format_double(keyframe.odometry.theta);
        for (int i = 0; i < 3; ++i) {
            for (int j = i; j < 3; ++j) {
                out << ' ' << format_double(keyframe.odometry_cov(i, j));
            }
        }
        out << '\n';
        int k = 0;
        for (const Detection& detection : keyframe.detections) {
            out << "DET " << keyframe.time << ' ' << k++ << ' ' << format_double(detection.range)
                << ' ' << format_double(detection.bearing) << ' ' << detection.detected_class
                << ' ' << detection.true_landmark_id << '\n';
        }
    }
    return out.str();
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        raise(ErrorCode::IoError, "cannot open dataset file: " + path);
    }
    return parse_dataset(in);
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        raise(ErrorCode::IoError, "cannot write dataset file: " + path);
    }
    out << serialize_dataset(dataset);
    if (!out) {
        raise(ErrorCode::IoError, "failed writing dataset file: " + path);
    }
}

AssociationMetrics association_metrics(const RunResult& result) {
    // Map each created landmark to the true id of its creating detection.
    std::map<int, int> landmark_true_id;
    for (const LandmarkEstimate& landmark : result.landmarks) {
        landmark_true_id[landmark.id] = landmark.true_id;
    }

    AssociationMetrics metrics;
    int matches_made = 0;
    int correct_matches = 0;
    int matchable = 0;
    for (const MeasurementLog& log : result.logs) {
        if (log.true_landmark_id < 0) {
            continue;
        }
        metrics.total_detections += 1;
        if (log.true_landmark_in_map) {
            matchable += 1;
        }
        bool correct = false;
        if (log.created_landmark) {
            // Creating a landmark is correct iff the true landmark was new.
            correct = !log.true_landmark_in_map;
        } else if (log.final_landmark < 0) {
            // Null hypothesis: correct iff the true landmark was not mapped.
            correct = !log.true_landmark_in_map;
        } else {
            matches_made += 1;
            correct = landmark_true_id[log.final_landmark] == log.true_landmark_id;
            if (correct) {
                correct_matches += 1;
            }
        }
        if (correct) {
            metrics.correct += 1;
        }
    }
    metrics.accuracy = metrics.total_detections > 0
                           ? static_cast<double>(metrics.correct) / metrics.total_detections
                           : 1.0;
    metrics.precision =
        matches_made > 0 ? static_cast<double>(correct_matches) / matches_made : 1.0;
    metrics.recall = matchable > 0 ? static_cast<double>(correct_matches) / matchable : 1.0;
    return metrics;
}

double class_accuracy(const RunResult& result, const Dataset& dataset, int min_observations) {
    std::map<int, int> true_class;
    for (const GroundTruthLandmark& landmark : dataset.ground_truth_landmarks) {
        true_class[landmark.id] = landmark.true_class;
    }
    int total = 0;
    int correct = 0;
    for (const LandmarkEstimate& landmark : result.landmarks) {
        if (landmark.true_id < 0 || landmark.num_observations < min_observations) {
            continue;
        }
        auto it = true_class.find(landmark.true_id);
        if (it == true_class.end()) {
            continue;
        }
        total += 1;
        if (landmark.map_class == it->second) {
            correct += 1;
        }
    }
    return total > 0 ? static_cast<double>(correct) / total : -1.0;
}

RunSummary summarize_run(const RunResult& result, const Dataset& dataset, std::uint64_t seed,
                         double odom_scale, double misclass_rate) {
    RunSummary summary;
    summary.method = method_to_string(result.method);
    summary.seed = seed;
    summary.odom_scale = odom_scale;
    summary.misclass_rate = misclass_rate;
    if (dataset.has_ground_truth_poses()) {
        auto [translation, rotation] =
            trajectory_error(result.trajectory, dataset.ground_truth_poses);
        summary.translation = translation;
        summary.rotation = rotation;
    }
    summary.association = association_metrics(result);
    summary.class_acc = class_accuracy(result, dataset);
    summary.num_landmarks = static_cast<int>(result.landmarks.size());
    summary.num_true_landmarks = static_cast<int>(dataset.ground_truth_landmarks.size());
    summary.num_poses = static_cast<int>(result.trajectory.size());
    summary.runtime_sec = result.runtime_sec;
    return summary;
}

std::string summary_to_json(const RunSummary& summary) {
    nlohmann::json record;
    record["method"] = summary.method;
    record["seed"] = summary.seed;
    record["odom_scale"] = summary.odom_scale;
    record["misclass_rate"] = summary.misclass_rate;
    record["trans"] = {{"max", summary.translation.max},
                       {"mean", summary.translation.mean},
                       {"median", summary.translation.median},
                       {"rmse", summary.translation.rmse}};
    record["rot"] = {{"max", summary.rotation.max},
                     {"mean", summary.rotation.mean},
                     {"median", summary.rotation.median},
                     {"rmse", summary.rotation.rmse}};
    record["association"] = {{"accuracy", summary.association.accuracy},
                             {"precision", summary.association.precision},
                             {"recall", summary.association.recall},
                             {"detections", summary.association.total_detections}};
    record["class_accuracy"] = summary.class_acc;
    record["landmarks"] = summary.num_landmarks;
    record["true_landmarks"] = summary.num_true_landmarks;
    record["poses"] = summary.num_poses;
    record["runtime_sec"] = summary.runtime_sec;
    return record.dump();
}

void append_jsonl(const std::string& path, const std::string& line) {
    std::ofstream out(path, std::ios::app);
    if (!out) {
        raise(ErrorCode::IoError, "cannot open results file: " + path);
    }
    out << line << '\n';
    if (!out) {
        raise(ErrorCode::IoError, "failed writing results file: " + path);
    }
}

void write_trajectory_csv(const std::string& path, const RunResult& result,
                          const Dataset& dataset) {
    std::ofstream out(path);
    if (!out) {
        raise(ErrorCode::IoError, "cannot write trajectory file: " + path);
    }
    const bool with_gt =
        dataset.has_ground_truth_poses() &&
        dataset.ground_truth_poses.size() == result.trajectory.size();
    out << (with_gt ? "t,x,y,theta,gt_x,gt_y,gt_theta\n" : "t,x,y,theta\n");
    for (std::size_t t = 0; t < result.trajectory.size(); ++t) {
        const Pose2& pose = result.trajectory[t];
        out << t << ',' << format_double(pose.x) << ',' << format_double(pose.y) << ','
            << format_double(pose.theta);
        if (with_gt) {
            const Pose2& gt = dataset.ground_truth_poses[t];
            out << ',' << format_double(gt.x) << ',' << format_double(gt.y) << ','
                << format_double(gt.theta);
        }
        out << '\n';
    }
}

std::vector<Pose2> read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        raise(ErrorCode::IoError, "cannot open trajectory file: " + path);
    }
    std::vector<Pose2> trajectory;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) {
            continue;
        }
        if (line_number == 1 && line.find("t,") == 0) {
            continue;  // header row
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        int t;
        Pose2 pose;
        if (!(fields >> t >> pose.x >> pose.y >> pose.theta)) {
            raise(ErrorCode::ParseError,
                  "line " + std::to_string(line_number) + ": malformed trajectory row");
        }
        trajectory.push_back(pose);
    }
    return trajectory;
}

}  // namespace semslam
