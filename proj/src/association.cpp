#include "semslam/association.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "semslam/errors.hpp"

namespace semslam {

ConfusionMatrix::ConfusionMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() < 2) {
        raise(ErrorCode::DomainError, "ConfusionMatrix: need a square matrix with C >= 2");
    }
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
        if (entries_.row(i).minCoeff() < 0.0) {
            raise(ErrorCode::DomainError, "ConfusionMatrix: negative entry");
        }
        if (std::abs(entries_.row(i).sum() - 1.0) > 1e-9) {
            raise(ErrorCode::DomainError, "ConfusionMatrix: row does not sum to 1");
        }
    }
}

ConfusionMatrix ConfusionMatrix::symmetric(int num_classes, double alpha) {
    if (num_classes < 2 || alpha < 0.0 || alpha > 0.5) {
        raise(ErrorCode::DomainError, "ConfusionMatrix::symmetric: invalid parameters");
    }
    Eigen::MatrixXd entries =
        Eigen::MatrixXd::Constant(num_classes, num_classes, alpha / (num_classes - 1));
    entries.diagonal().setConstant(1.0 - alpha);
    return ConfusionMatrix(entries);
}

ClassBelief ClassBelief::uniform(int num_classes) {
    ClassBelief belief;
    belief.probs = Eigen::VectorXd::Constant(num_classes, 1.0 / num_classes);
    return belief;
}

void ClassBelief::validate() const {
    if (probs.size() < 2 || probs.minCoeff() < 0.0 || std::abs(probs.sum() - 1.0) > 1e-9) {
        raise(ErrorCode::DomainError, "ClassBelief: not a probability vector");
    }
}

double semantic_likelihood(int detected_class, const ClassBelief& belief,
                           const ConfusionMatrix& confusion) {
    if (detected_class < 0 || detected_class >= confusion.num_classes() ||
        belief.probs.size() != confusion.num_classes()) {
        raise(ErrorCode::DomainError, "semantic_likelihood: class index out of range");
    }
    return confusion.entries().col(detected_class).dot(belief.probs);
}

GeometricLikelihood geometric_likelihood(const Eigen::Vector2d& measured_range_bearing,
                                         const Pose2& pose_estimate, const Point2& landmark_estimate,
                                         const Eigen::Matrix<double, 5, 5>& joint_cov,
                                         const Eigen::Matrix2d& gamma) {
    RangeBearingJacobians jac;
    const RangeBearing predicted = range_bearing(pose_estimate, landmark_estimate, &jac);
    Eigen::Vector2d residual(predicted.range - measured_range_bearing[0],
                             wrap_angle(predicted.bearing - measured_range_bearing[1]));

    Eigen::Matrix<double, 2, 5> h;
    h.block<2, 3>(0, 0) = jac.wrt_pose;
    h.block<2, 2>(0, 3) = jac.wrt_point;
    const Eigen::Matrix2d innovation_cov = h * joint_cov * h.transpose() + gamma;

    Eigen::LLT<Eigen::Matrix2d> llt(innovation_cov);
    if (llt.info() != Eigen::Success) {
        raise(ErrorCode::NotPositiveDefinite, "geometric_likelihood: innovation covariance not SPD");
    }
    const Eigen::Vector2d whitened = llt.matrixL().solve(residual);
    const double mahalanobis_sq = whitened.squaredNorm();
    const double det = llt.matrixL()(0, 0) * llt.matrixL()(0, 0) * llt.matrixL()(1, 1) *
                       llt.matrixL()(1, 1);
    GeometricLikelihood out;
    out.mahalanobis_sq = mahalanobis_sq;
    out.likelihood = std::exp(-0.5 * mahalanobis_sq) / (2.0 * kPi * std::sqrt(det));
    return out;
}

HypothesisSet compute_hypotheses(const SemanticMeasurement& measurement, const Pose2& pose_estimate,
                                 std::span<const CandidateContext> candidates,
                                 const ConfusionMatrix& confusion,
                                 const AssociationParams& params) {
    const double gate = chi2_quantile(params.gate_confidence, 2);
    const Eigen::Vector2d z(measurement.range, measurement.bearing);

    HypothesisSet hypotheses;
    double total_likelihood = 0.0;
    double total_geometric = 0.0;
    for (const CandidateContext& candidate : candidates) {
        const GeometricLikelihood geometric = geometric_likelihood(
            z, pose_estimate, candidate.position, candidate.joint_cov, measurement.geometric_cov);
        if (geometric.mahalanobis_sq > gate) {
            continue;
        }
        const double semantic =
            semantic_likelihood(measurement.detected_class, candidate.belief, confusion);
        HypothesisSet::Candidate entry;
        entry.landmark_id = candidate.landmark_id;
        entry.mahalanobis_sq = geometric.mahalanobis_sq;
        entry.likelihood = semantic * geometric.likelihood;
        entry.weight = geometric.likelihood;  // geometric-only fallback, see below
        hypotheses.candidates.push_back(entry);
        total_likelihood += entry.likelihood;
        total_geometric += geometric.likelihood;
    }

    if (hypotheses.candidates.empty()) {
        hypotheses.is_new_landmark = true;
        return hypotheses;
    }

    std::sort(hypotheses.candidates.begin(), hypotheses.candidates.end(),
              [](const auto& a, const auto& b) { return a.landmark_id < b.landmark_id; });

    // With hard-zero confusion entries every fused likelihood can vanish; the
    // semantic term never gates alone, so fall back to the geometric weights.
    const bool use_fused = total_likelihood > 0.0;
    if (use_fused) {
        // Candidates with exactly zero fused likelihood would get zero weight;
        // drop them (they are impossible under the fused model anyway).
        std::erase_if(hypotheses.candidates,
                      [](const HypothesisSet::Candidate& c) { return c.likelihood <= 0.0; });
    }
    const double total = use_fused ? total_likelihood : total_geometric;
    const double mass = 1.0 - params.null_weight;
    for (auto& candidate : hypotheses.candidates) {
        const double likelihood = use_fused ? candidate.likelihood : candidate.weight;
        candidate.weight = mass * likelihood / total;
    }
    hypotheses.null_weight = params.null_weight;
    return hypotheses;
}

ClassBelief update_class_belief(const ClassBelief& belief, int detected_class,
                                const ConfusionMatrix& confusion, double weight) {
    if (weight < 0.0 || weight > 1.0) {
        raise(ErrorCode::DomainError, "update_class_belief: weight outside [0, 1]");
    }
    ClassBelief updated;
    updated.probs =
        belief.probs.array() *
        (weight * confusion.entries().col(detected_class).array() + (1.0 - weight));
    const double total = updated.probs.sum();
    if (total <= 0.0) {
        // Detection impossible under the current belief (zero confusion
        // entries); keep the prior.
        return belief;
    }
    updated.probs /= total;
    return updated;
}

int map_class(const ClassBelief& belief) {
    int best = 0;
    for (int c = 1; c < belief.probs.size(); ++c) {
        if (belief.probs[c] > belief.probs[best]) {
            best = c;
        }
    }
    return best;
}

}  // namespace semslam
