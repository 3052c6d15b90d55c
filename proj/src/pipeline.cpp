#include "semslam/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "semslam/errors.hpp"

namespace semslam {

MethodKind method_from_string(std::string_view name) {
    if (name == "known") return MethodKind::KnownDA;
    if (name == "ml") return MethodKind::MaxLikelihood;
    if (name == "gpda") return MethodKind::GPDA;
    if (name == "mm") return MethodKind::MaxMixture;
    if (name == "mm-nh") return MethodKind::MaxMixtureNull;
    raise(ErrorCode::DomainError, "unknown method: " + std::string(name));
}

std::string method_to_string(MethodKind method) {
    switch (method) {
        case MethodKind::KnownDA: return "known";
        case MethodKind::MaxLikelihood: return "ml";
        case MethodKind::GPDA: return "gpda";
        case MethodKind::MaxMixture: return "mm";
        case MethodKind::MaxMixtureNull: return "mm-nh";
    }
    return "unknown";
}

Point2 landmark_from_measurement(const Pose2& pose, double range, double bearing) {
    const double heading = pose.theta + bearing;
    return {pose.x + range * std::cos(heading), pose.y + range * std::sin(heading)};
}

SlamState make_initial_state(const Dataset& dataset, MethodKind method,
                             const PipelineConfig& config) {
    SlamState state;
    state.method = method;
    state.config = config;
    state.confusion = dataset.confusion;
    state.gamma = dataset.gamma;

    const Pose2 anchor =
        dataset.has_ground_truth_poses() ? dataset.ground_truth_poses.front() : Pose2{};
    state.values.insert_pose(0, anchor);
    PriorPose2Factor prior;
    prior.pose = VariableId::pose(0);
    prior.mean = anchor;
    prior.cov = Eigen::Matrix3d::Identity() * 1e-6;
    state.graph.add(prior);
    return state;
}

namespace {

double effective_null_weight(const SlamState& state) {
    return state.method == MethodKind::MaxMixtureNull ? state.config.null_weight : 0.0;
}

int create_landmark(SlamState& state, const SemanticMeasurement& z, const Pose2& pose_estimate,
                    int true_id) {
    const int id = static_cast<int>(state.landmarks.size());
    state.values.insert_landmark(id, landmark_from_measurement(pose_estimate, z.range, z.bearing));

    LandmarkRecord record;
    record.id = id;
    record.created_at_step = z.time;
    record.created_by_true_id = true_id;
    record.num_observations = 1;
    record.belief = update_class_belief(ClassBelief::uniform(state.confusion.num_classes()),
                                        z.detected_class, state.confusion, 1.0);
    state.landmarks.push_back(std::move(record));
    if (true_id >= 0 && state.true_to_landmark.find(true_id) == state.true_to_landmark.end()) {
        state.true_to_landmark[true_id] = id;
    }

    RangeBearingFactor factor;
    factor.pose = VariableId::pose(z.time);
    factor.landmark = VariableId::landmark(id);
    factor.range = z.range;
    factor.bearing = z.bearing;
    factor.cov = z.geometric_cov;
    state.graph.add(factor);
    return id;
}

void commit_plain_factor(SlamState& state, const SemanticMeasurement& z, int landmark_id) {
    RangeBearingFactor factor;
    factor.pose = VariableId::pose(z.time);
    factor.landmark = VariableId::landmark(landmark_id);
    factor.range = z.range;
    factor.bearing = z.bearing;
    factor.cov = z.geometric_cov;
    state.graph.add(factor);
    state.landmarks[static_cast<std::size_t>(landmark_id)].belief =
        update_class_belief(state.landmarks[static_cast<std::size_t>(landmark_id)].belief,
                            z.detected_class, state.confusion, 1.0);
    state.landmarks[static_cast<std::size_t>(landmark_id)].num_observations += 1;
}

int argmax_weight_candidate(const HypothesisSet& hypotheses) {
    int best = hypotheses.candidates.front().landmark_id;
    double best_weight = hypotheses.candidates.front().weight;
    for (const auto& candidate : hypotheses.candidates) {
        if (candidate.weight > best_weight) {
            best = candidate.landmark_id;
            best_weight = candidate.weight;
        }
    }
    return best;
}

void apply_soft_belief_updates(SlamState& state, const SemanticMeasurement& z,
                               const HypothesisSet& hypotheses) {
    for (const auto& candidate : hypotheses.candidates) {
        auto& record = state.landmarks[static_cast<std::size_t>(candidate.landmark_id)];
        record.belief =
            update_class_belief(record.belief, z.detected_class, state.confusion, candidate.weight);
    }
    state.landmarks[static_cast<std::size_t>(argmax_weight_candidate(hypotheses))]
        .num_observations += 1;
}

constexpr double kGpdaWeightFloor = 1e-9;

void handle_detection(SlamState& state, const SemanticMeasurement& z,
                      const std::vector<CandidateContext>& contexts, int true_id) {
    MeasurementLog log;
    log.step = z.time;
    log.detection_index = z.index;
    log.range = z.range;
    log.bearing = z.bearing;
    log.detected_class = z.detected_class;
    log.true_landmark_id = true_id;
    log.true_landmark_in_map =
        true_id >= 0 && state.true_to_landmark.find(true_id) != state.true_to_landmark.end();

    const Pose2 pose_estimate = state.values.pose(VariableId::pose(z.time));
    AssociationParams params{state.config.gate_confidence, effective_null_weight(state)};
    log.hypotheses = compute_hypotheses(z, pose_estimate, contexts, state.confusion, params);

    const bool mixture_method =
        state.method == MethodKind::MaxMixture || state.method == MethodKind::MaxMixtureNull;

    if (state.method == MethodKind::KnownDA) {
        auto it = state.true_to_landmark.find(true_id);
        if (it == state.true_to_landmark.end()) {
            log.created_landmark = true;
            log.action_landmark = create_landmark(state, z, pose_estimate, true_id);
        } else {
            log.action_landmark = it->second;
            commit_plain_factor(state, z, it->second);
        }
    } else if (log.hypotheses.is_new_landmark) {
        log.created_landmark = true;
        log.action_landmark = create_landmark(state, z, pose_estimate, true_id);
    } else if (state.method == MethodKind::MaxLikelihood) {
        log.action_landmark = argmax_weight_candidate(log.hypotheses);
        commit_plain_factor(state, z, log.action_landmark);
    } else if (mixture_method) {
        SemanticMaxMixtureFactor factor;
        factor.pose = VariableId::pose(z.time);
        factor.range = z.range;
        factor.bearing = z.bearing;
        factor.null_weight = log.hypotheses.null_weight;
        factor.null_sigma = state.config.null_sigma;
        for (const auto& candidate : log.hypotheses.candidates) {
            factor.components.push_back(
                {VariableId::landmark(candidate.landmark_id), candidate.weight, z.geometric_cov});
        }
        factor.validate();
        log.mixture_factor_index = static_cast<int>(state.graph.size());
        state.graph.add(std::move(factor));
        apply_soft_belief_updates(state, z, log.hypotheses);
    } else {  // GPDA: one surrogate factor per candidate, covariance Gamma / w
        GpdaGroup group;
        group.pose = VariableId::pose(z.time);
        group.measurement = z;
        group.log_index = state.logs.size();
        for (const auto& candidate : log.hypotheses.candidates) {
            RangeBearingFactor factor;
            factor.pose = VariableId::pose(z.time);
            factor.landmark = VariableId::landmark(candidate.landmark_id);
            factor.range = z.range;
            factor.bearing = z.bearing;
            factor.cov = z.geometric_cov / std::max(candidate.weight, kGpdaWeightFloor);
            group.factor_indices.push_back(state.graph.size());
            group.landmark_ids.push_back(candidate.landmark_id);
            group.weights.push_back(candidate.weight);
            state.graph.add(factor);
        }
        state.gpda_groups.push_back(std::move(group));
        apply_soft_belief_updates(state, z, log.hypotheses);
    }
    state.logs.push_back(std::move(log));
}

void reoptimize(SlamState& state) {
    auto [optimized, stats] = optimize(state.graph, state.values, state.config.optimizer);
    state.values = std::move(optimized);
    state.step_stats.push_back(std::move(stats));
    state.steps_since_optimize = 0;
}

}  // namespace

void step(SlamState& state, const Keyframe& keyframe) {
    const int t = state.current_pose + 1;
    if (state.method == MethodKind::KnownDA) {
        for (const Detection& detection : keyframe.detections) {
            if (detection.true_landmark_id < 0) {
                raise(ErrorCode::DomainError,
                      "known-DA method requires ground-truth association ids");
            }
        }
    }

    BetweenPose2Factor odom;
    odom.pose_a = VariableId::pose(t - 1);
    odom.pose_b = VariableId::pose(t);
    odom.measured = keyframe.odometry;
    odom.cov = keyframe.odometry_cov;
    state.graph.add(odom);
    state.values.insert_pose(
        t, se2_compose(state.values.pose(VariableId::pose(t - 1)), keyframe.odometry));
    state.current_pose = t;

    if (!keyframe.detections.empty()) {
        // Candidate snapshot for the whole frame: weights for every detection
        // are computed against the same marginals, before any of this frame's
        // landmark factors are added.
        std::vector<CandidateContext> contexts;
        if (!state.landmarks.empty()) {
            MarginalSolver solver(state.graph, state.values);
            std::vector<VariableId> landmark_ids;
            landmark_ids.reserve(state.landmarks.size());
            for (const LandmarkRecord& record : state.landmarks) {
                landmark_ids.push_back(VariableId::landmark(record.id));
            }
            const auto joint_covs =
                solver.pose_landmark_covariances(VariableId::pose(t), landmark_ids);
            contexts.reserve(state.landmarks.size());
            for (std::size_t i = 0; i < state.landmarks.size(); ++i) {
                CandidateContext context;
                context.landmark_id = state.landmarks[i].id;
                context.position = state.values.landmark(landmark_ids[i]);
                context.belief = state.landmarks[i].belief;
                context.joint_cov = joint_covs[i];
                contexts.push_back(std::move(context));
            }
        }

        int k = 0;
        for (const Detection& detection : keyframe.detections) {
            SemanticMeasurement z;
            z.range = detection.range;
            z.bearing = detection.bearing;
            z.detected_class = detection.detected_class;
            z.geometric_cov = state.gamma;
            z.time = t;
            z.index = k++;
            handle_detection(state, z, contexts, detection.true_landmark_id);
        }
    }

    state.steps_since_optimize += 1;
    if (state.steps_since_optimize >= state.config.reoptimize_every) {
        reoptimize(state);
        if (state.method == MethodKind::GPDA) {
            gpda_refine(state);
        }
    }
}

void gpda_refine(SlamState& state) {
    bool any_ambiguous = false;
    for (const GpdaGroup& group : state.gpda_groups) {
        if (group.landmark_ids.size() > 1) {
            any_ambiguous = true;
            break;
        }
    }
    if (!any_ambiguous) {
        return;
    }

    for (int round = 0; round < 10; ++round) {
        MarginalSolver solver(state.graph, state.values);
        double max_change = 0.0;
        std::vector<std::vector<double>> new_weights(state.gpda_groups.size());

        for (std::size_t g = 0; g < state.gpda_groups.size(); ++g) {
            const GpdaGroup& group = state.gpda_groups[g];
            if (group.landmark_ids.size() < 2) {
                new_weights[g] = group.weights;
                continue;
            }
            std::vector<VariableId> landmark_ids;
            for (int id : group.landmark_ids) {
                landmark_ids.push_back(VariableId::landmark(id));
            }
            const auto joint_covs = solver.pose_landmark_covariances(group.pose, landmark_ids);
            const Pose2 pose_estimate = state.values.pose(group.pose);
            const Eigen::Vector2d z(group.measurement.range, group.measurement.bearing);

            std::vector<double> likelihoods(group.landmark_ids.size());
            double total = 0.0;
            for (std::size_t i = 0; i < group.landmark_ids.size(); ++i) {
                const auto& record = state.landmarks[static_cast<std::size_t>(group.landmark_ids[i])];
                const double semantic = semantic_likelihood(group.measurement.detected_class,
                                                            record.belief, state.confusion);
                const GeometricLikelihood geometric = geometric_likelihood(
                    z, pose_estimate, state.values.landmark(landmark_ids[i]), joint_covs[i],
                    group.measurement.geometric_cov);
                likelihoods[i] = semantic * geometric.likelihood;
                total += likelihoods[i];
            }
            new_weights[g].resize(likelihoods.size());
            for (std::size_t i = 0; i < likelihoods.size(); ++i) {
                new_weights[g][i] = total > 0.0
                                        ? likelihoods[i] / total
                                        : 1.0 / static_cast<double>(likelihoods.size());
                max_change = std::max(max_change, std::abs(new_weights[g][i] - group.weights[i]));
            }
        }

        if (max_change < 1e-3) {
            break;
        }
        for (std::size_t g = 0; g < state.gpda_groups.size(); ++g) {
            GpdaGroup& group = state.gpda_groups[g];
            group.weights = new_weights[g];
            for (std::size_t i = 0; i < group.factor_indices.size(); ++i) {
                auto& factor =
                    std::get<RangeBearingFactor>(state.graph.mutable_at(group.factor_indices[i]));
                factor.cov =
                    group.measurement.geometric_cov / std::max(group.weights[i], kGpdaWeightFloor);
            }
        }
        auto [optimized, stats] = optimize(state.graph, state.values, state.config.optimizer);
        state.values = std::move(optimized);
    }
}

RunResult finalize(SlamState& state) {
    if (state.steps_since_optimize > 0) {
        auto [optimized, stats] = optimize(state.graph, state.values, state.config.optimizer);
        state.values = std::move(optimized);
        state.step_stats.push_back(std::move(stats));
        state.steps_since_optimize = 0;
    }

    RunResult result;
    result.method = state.method;
    result.trajectory.reserve(static_cast<std::size_t>(state.current_pose) + 1);
    for (int t = 0; t <= state.current_pose; ++t) {
        result.trajectory.push_back(state.values.pose(VariableId::pose(t)));
    }
    for (const LandmarkRecord& record : state.landmarks) {
        LandmarkEstimate estimate;
        estimate.id = record.id;
        estimate.position = state.values.landmark(VariableId::landmark(record.id));
        estimate.map_class = map_class(record.belief);
        estimate.true_id = record.created_by_true_id;
        estimate.created_at_step = record.created_at_step;
        estimate.num_observations = record.num_observations;
        result.landmarks.push_back(estimate);
    }

    // Resolve final associations at the converged estimate.
    for (MeasurementLog& log : state.logs) {
        if (log.mixture_factor_index >= 0) {
            const auto& factor = std::get<SemanticMaxMixtureFactor>(
                state.graph.at(static_cast<std::size_t>(log.mixture_factor_index)));
            const int selected = select_component(factor, state.values).first;
            log.final_landmark = factor.is_null_component(selected)
                                     ? -1
                                     : factor.components[static_cast<std::size_t>(selected)]
                                           .landmark.index;
        } else {
            log.final_landmark = log.action_landmark;
        }
    }
    for (const GpdaGroup& group : state.gpda_groups) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < group.weights.size(); ++i) {
            if (group.weights[i] > group.weights[best]) {
                best = i;
            }
        }
        state.logs[group.log_index].final_landmark = group.landmark_ids[best];
    }

    result.logs = state.logs;
    result.step_stats = state.step_stats;
    result.final_objective = graph_error(state.graph, state.values);
    return result;
}

RunResult run(const Dataset& dataset, MethodKind method, const PipelineConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    SlamState state = make_initial_state(dataset, method, config);
    for (const Keyframe& keyframe : dataset.keyframes) {
        step(state, keyframe);
    }
    RunResult result = finalize(state);
    result.runtime_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace semslam
