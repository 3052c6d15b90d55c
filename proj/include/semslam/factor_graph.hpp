#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "semslam/mixture.hpp"
#include "semslam/values.hpp"

namespace semslam {

/// Anchors a pose to a fixed mean. The residual is expressed in the frame of
/// the mean: [R_m^T (t - t_m); wrap(theta - theta_m)], so the covariance is a
/// tangent-space covariance at the mean.
struct PriorPose2Factor {
    VariableId pose;
    Pose2 mean;
    Eigen::Matrix3d cov{Eigen::Matrix3d::Identity()};
};

/// Odometry constraint on the relative transform between(a, b).
struct BetweenPose2Factor {
    VariableId pose_a;
    VariableId pose_b;
    Pose2 measured;
    Eigen::Matrix3d cov{Eigen::Matrix3d::Identity()};
};

/// Plain landmark observation with a fixed association.
struct RangeBearingFactor {
    VariableId pose;
    VariableId landmark;
    double range{0.0};
    double bearing{0.0};
    Eigen::Matrix2d cov{Eigen::Matrix2d::Identity()};
};

using Factor =
    std::variant<PriorPose2Factor, BetweenPose2Factor, RangeBearingFactor, SemanticMaxMixtureFactor>;

int factor_residual_dim(const Factor& factor);
std::vector<VariableId> factor_variables(const Factor& factor);

/// Whitened residual and Jacobian blocks of one factor at `values`. For
/// mixture factors, the dominant component is re-selected at `values` and
/// `constant` carries its -log w on top of the usual 0.5 log det(2 pi cov).
struct FactorBlocks {
    Eigen::VectorXd whitened_residual;
    std::vector<std::pair<VariableId, Eigen::MatrixXd>> whitened_jacobians;
    double constant{0.0};
};

FactorBlocks evaluate_factor(const Factor& factor, const Values& values);

/// 0.5 |whitened residual|^2 + constant. Summed over a graph this is the
/// negative log posterior up to a fixed offset, which is the quantity the
/// optimizer monitors (the constants matter when mixture components switch).
double factor_error(const Factor& factor, const Values& values);

class FactorGraph {
  public:
    void add(Factor factor) { factors_.push_back(std::move(factor)); }
    std::size_t size() const { return factors_.size(); }
    const std::vector<Factor>& factors() const { return factors_; }
    const Factor& at(std::size_t i) const { return factors_.at(i); }
    Factor& mutable_at(std::size_t i) { return factors_.at(i); }

  private:
    std::vector<Factor> factors_;
};

double graph_error(const FactorGraph& graph, const Values& values);

struct OptimizerConfig {
    int max_iterations{100};
    /// Stop when an accepted step decreases the error by less than
    /// max(absolute_error_tol, relative_decrease_tol * |error|).
    double relative_decrease_tol{1e-6};
    double absolute_error_tol{1e-8};
    double initial_lm_lambda{1e-4};
    double lm_lambda_factor{10.0};
};

struct OptStats {
    int iterations{0};
    double initial_error{0.0};
    double final_error{0.0};
    bool converged{false};
    /// Error after every accepted step; non-increasing by construction.
    std::vector<double> accepted_errors;
};

/// Whitened stacked Jacobian/residual of the whole graph at `values`.
struct LinearSystem {
    Eigen::SparseMatrix<double> jacobian;
    Eigen::VectorXd residual;
    VariableOrdering ordering;
    double constant{0.0};
};

LinearSystem linearize(const FactorGraph& graph, const Values& values);

/// Levenberg-Marquardt with manifold retraction and multiplicative diagonal
/// damping. Non-convergence within max_iterations is reported via the stats
/// flag, not an error; a structurally rank-deficient system (e.g. no prior)
/// throws SingularSystem.
std::pair<Values, OptStats> optimize(const FactorGraph& graph, const Values& initial,
                                     const OptimizerConfig& config = {});

/// Joint covariance block over `ids` from the inverse of the Gauss-Newton
/// information matrix at `values`, ordered as given.
Eigen::MatrixXd joint_marginal_covariance(const FactorGraph& graph, const Values& values,
                                          std::span<const VariableId> ids);

/// Factorizes the information matrix once so that several joint covariance
/// blocks can be recovered against the same estimate.
class MarginalSolver {
  public:
    MarginalSolver(const FactorGraph& graph, const Values& values);

    Eigen::MatrixXd joint_covariance(std::span<const VariableId> ids) const;

    /// Joint 5x5 covariances [pose tangent | point] of one pose against many
    /// landmarks; the pose columns are solved once and shared.
    std::vector<Eigen::Matrix<double, 5, 5>> pose_landmark_covariances(
        const VariableId& pose, std::span<const VariableId> landmarks) const;

  private:
    VariableOrdering ordering_;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

}  // namespace semslam
