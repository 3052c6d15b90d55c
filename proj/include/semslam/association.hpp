#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "semslam/geometry.hpp"

namespace semslam {

/// Row-stochastic classifier error model: entry (i, k) is the probability
/// that a landmark of true class i is detected as class k.
class ConfusionMatrix {
  public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(Eigen::MatrixXd entries);

    /// diag 1 - alpha, off-diagonal alpha / (C - 1).
    static ConfusionMatrix symmetric(int num_classes, double alpha);

    int num_classes() const { return static_cast<int>(entries_.rows()); }
    double operator()(int true_class, int detected_class) const {
        return entries_(true_class, detected_class);
    }
    const Eigen::MatrixXd& entries() const { return entries_; }

  private:
    Eigen::MatrixXd entries_;
};

/// Categorical posterior over a landmark's semantic class.
struct ClassBelief {
    Eigen::VectorXd probs;

    static ClassBelief uniform(int num_classes);
    void validate() const;
};

/// Joint geometric and semantic observation of one landmark.
struct SemanticMeasurement {
    double range{0.0};
    double bearing{0.0};
    int detected_class{0};
    Eigen::Matrix2d geometric_cov{Eigen::Matrix2d::Identity()};
    int time{0};
    int index{0};
};

/// Candidate landmark association weights for one measurement. Weights plus
/// null_weight sum to 1 unless is_new_landmark.
struct HypothesisSet {
    struct Candidate {
        int landmark_id{0};
        double weight{0.0};
        double mahalanobis_sq{0.0};
        double likelihood{0.0};  // unnormalized semantic * geometric
    };

    std::vector<Candidate> candidates;
    double null_weight{0.0};
    bool is_new_landmark{false};
};

/// p(detected class | association to this landmark), Eq.-style sum over the
/// landmark's class belief through the confusion matrix.
double semantic_likelihood(int detected_class, const ClassBelief& belief,
                           const ConfusionMatrix& confusion);

struct GeometricLikelihood {
    double likelihood{0.0};
    double mahalanobis_sq{0.0};
};

/// Measurement-space marginal likelihood of z_p under the joint pose/landmark
/// marginal: residual against the prediction at the estimates, innovation
/// covariance R = H Sigma H^T + Gamma with H the 2x5 measurement Jacobian
/// stacked [pose tangent | point].
GeometricLikelihood geometric_likelihood(const Eigen::Vector2d& measured_range_bearing,
                                         const Pose2& pose_estimate, const Point2& landmark_estimate,
                                         const Eigen::Matrix<double, 5, 5>& joint_cov,
                                         const Eigen::Matrix2d& gamma);

struct AssociationParams {
    double gate_confidence{0.9};
    double null_weight{0.1};
};

/// Everything the weight computation needs to know about one candidate
/// landmark, snapshotted from the current state.
struct CandidateContext {
    int landmark_id{0};
    Point2 position{0.0, 0.0};
    ClassBelief belief;
    Eigen::Matrix<double, 5, 5> joint_cov{Eigen::Matrix<double, 5, 5>::Zero()};
};

/// Fused semantic/geometric weights over candidate landmarks with chi-square
/// gating (dof 2). No surviving candidate means is_new_landmark; otherwise
/// survivors are normalized to 1 - null_weight (or to 1 when null_weight is
/// 0). Candidates are reported sorted by landmark id.
HypothesisSet compute_hypotheses(const SemanticMeasurement& measurement, const Pose2& pose_estimate,
                                 std::span<const CandidateContext> candidates,
                                 const ConfusionMatrix& confusion,
                                 const AssociationParams& params);

/// Soft-assignment class update: posterior(c) proportional to
/// belief(c) * (w * confusion(c, detected) + 1 - w). w = 1 is the exact Bayes
/// update, w = 0 leaves the belief unchanged.
ClassBelief update_class_belief(const ClassBelief& belief, int detected_class,
                                const ConfusionMatrix& confusion, double weight);

/// MAP class; ties break toward the lowest class index.
int map_class(const ClassBelief& belief);

}  // namespace semslam
