#include "semslam/factor_graph.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "semslam/errors.hpp"

namespace semslam {

namespace {

struct ResidualDimVisitor {
    int operator()(const PriorPose2Factor&) const { return 3; }
    int operator()(const BetweenPose2Factor&) const { return 3; }
    int operator()(const RangeBearingFactor&) const { return 2; }
    int operator()(const SemanticMaxMixtureFactor&) const { return 2; }
};

struct VariablesVisitor {
    std::vector<VariableId> operator()(const PriorPose2Factor& f) const { return {f.pose}; }
    std::vector<VariableId> operator()(const BetweenPose2Factor& f) const {
        return {f.pose_a, f.pose_b};
    }
    std::vector<VariableId> operator()(const RangeBearingFactor& f) const {
        return {f.pose, f.landmark};
    }
    std::vector<VariableId> operator()(const SemanticMaxMixtureFactor& f) const {
        std::vector<VariableId> ids{f.pose};
        for (const auto& c : f.components) {
            ids.push_back(c.landmark);
        }
        return ids;
    }
};

template <int N>
double half_log_det_2pi(const Eigen::LLT<Eigen::Matrix<double, N, N>>& llt) {
    double log_det = 0.0;
    for (int i = 0; i < N; ++i) {
        log_det += 2.0 * std::log(llt.matrixL()(i, i));
    }
    return 0.5 * (log_det + N * std::log(2.0 * kPi));
}

struct EvaluateVisitor {
    const Values& values;

    FactorBlocks operator()(const PriorPose2Factor& f) const {
        const Pose2& pose = values.pose(f.pose);
        const Eigen::Matrix2d rot_mean_t = f.mean.rotation().transpose();
        Eigen::Vector3d residual;
        residual.head<2>() = rot_mean_t * (pose.translation() - f.mean.translation());
        residual[2] = wrap_angle(pose.theta - f.mean.theta);

        Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();
        jac.block<2, 2>(0, 0) = rot_mean_t * pose.rotation();
        jac(2, 2) = 1.0;

        Eigen::LLT<Eigen::Matrix3d> llt(f.cov);
        if (llt.info() != Eigen::Success) {
            raise(ErrorCode::NotPositiveDefinite, "PriorPose2Factor: covariance not SPD");
        }
        FactorBlocks blocks;
        blocks.whitened_residual = llt.matrixL().solve(residual);
        blocks.whitened_jacobians.emplace_back(f.pose, llt.matrixL().solve(jac));
        blocks.constant = half_log_det_2pi<3>(llt);
        return blocks;
    }

    FactorBlocks operator()(const BetweenPose2Factor& f) const {
        const Pose2& a = values.pose(f.pose_a);
        const Pose2& b = values.pose(f.pose_b);
        const Pose2 h = se2_between(a, b);
        Eigen::Vector3d residual(h.x - f.measured.x, h.y - f.measured.y,
                                 wrap_angle(h.theta - f.measured.theta));

        // Right-multiplicative tangent Jacobians of between(a, b).
        Eigen::Matrix3d jac_a = Eigen::Matrix3d::Zero();
        jac_a(0, 0) = -1.0;
        jac_a(1, 1) = -1.0;
        jac_a(0, 2) = h.y;
        jac_a(1, 2) = -h.x;
        jac_a(2, 2) = -1.0;

        Eigen::Matrix3d jac_b = Eigen::Matrix3d::Zero();
        jac_b.block<2, 2>(0, 0) = h.rotation();
        jac_b(2, 2) = 1.0;

        Eigen::LLT<Eigen::Matrix3d> llt(f.cov);
        if (llt.info() != Eigen::Success) {
            raise(ErrorCode::NotPositiveDefinite, "BetweenPose2Factor: covariance not SPD");
        }
        FactorBlocks blocks;
        blocks.whitened_residual = llt.matrixL().solve(residual);
        blocks.whitened_jacobians.emplace_back(f.pose_a, llt.matrixL().solve(jac_a));
        blocks.whitened_jacobians.emplace_back(f.pose_b, llt.matrixL().solve(jac_b));
        blocks.constant = half_log_det_2pi<3>(llt);
        return blocks;
    }

    FactorBlocks operator()(const RangeBearingFactor& f) const {
        RangeBearingJacobians jac;
        const Eigen::Vector2d residual = range_bearing_residual(
            values.pose(f.pose), values.landmark(f.landmark), f.range, f.bearing, &jac);
        Eigen::LLT<Eigen::Matrix2d> llt(f.cov);
        if (llt.info() != Eigen::Success) {
            raise(ErrorCode::NotPositiveDefinite, "RangeBearingFactor: covariance not SPD");
        }
        FactorBlocks blocks;
        blocks.whitened_residual = llt.matrixL().solve(residual);
        blocks.whitened_jacobians.emplace_back(f.pose, llt.matrixL().solve(jac.wrt_pose));
        blocks.whitened_jacobians.emplace_back(f.landmark, llt.matrixL().solve(jac.wrt_point));
        blocks.constant = half_log_det_2pi<2>(llt);
        return blocks;
    }

    FactorBlocks operator()(const SemanticMaxMixtureFactor& f) const {
        const MixtureLinearization lin = mixture_linearize(f, values);
        FactorBlocks blocks;
        blocks.whitened_residual = lin.whitened_residual;
        blocks.whitened_jacobians.emplace_back(f.pose, lin.whitened_jac_pose);
        blocks.whitened_jacobians.emplace_back(lin.landmark, lin.whitened_jac_landmark);
        blocks.constant = lin.constant;
        return blocks;
    }
};

}  // namespace

int factor_residual_dim(const Factor& factor) {
    return std::visit(ResidualDimVisitor{}, factor);
}

std::vector<VariableId> factor_variables(const Factor& factor) {
    return std::visit(VariablesVisitor{}, factor);
}

FactorBlocks evaluate_factor(const Factor& factor, const Values& values) {
    return std::visit(EvaluateVisitor{values}, factor);
}

double factor_error(const Factor& factor, const Values& values) {
    const FactorBlocks blocks = evaluate_factor(factor, values);
    return 0.5 * blocks.whitened_residual.squaredNorm() + blocks.constant;
}

double graph_error(const FactorGraph& graph, const Values& values) {
    double total = 0.0;
    for (const Factor& factor : graph.factors()) {
        total += factor_error(factor, values);
    }
    return total;
}

namespace {

// Total error split into the quadratic part and the log-normalization part;
// the relative convergence test is scaled by the quadratic part only (the
// constants shift the total by an arbitrary offset).
struct ErrorParts {
    double residual{0.0};
    double constant{0.0};

    double total() const { return residual + constant; }
};

ErrorParts graph_error_parts(const FactorGraph& graph, const Values& values) {
    ErrorParts parts;
    for (const Factor& factor : graph.factors()) {
        const FactorBlocks blocks = evaluate_factor(factor, values);
        parts.residual += 0.5 * blocks.whitened_residual.squaredNorm();
        parts.constant += blocks.constant;
    }
    return parts;
}

}  // namespace

LinearSystem linearize(const FactorGraph& graph, const Values& values) {
    LinearSystem system;
    system.ordering = VariableOrdering::from_values(values);

    int total_rows = 0;
    for (const Factor& factor : graph.factors()) {
        total_rows += factor_residual_dim(factor);
    }
    system.residual.resize(total_rows);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(total_rows) * 5);

    int row = 0;
    for (const Factor& factor : graph.factors()) {
        const FactorBlocks blocks = evaluate_factor(factor, values);
        const int dim = static_cast<int>(blocks.whitened_residual.size());
        system.residual.segment(row, dim) = blocks.whitened_residual;
        system.constant += blocks.constant;
        for (const auto& [id, jac] : blocks.whitened_jacobians) {
            const int col = system.ordering.offset(id);
            for (int r = 0; r < jac.rows(); ++r) {
                for (int c = 0; c < jac.cols(); ++c) {
                    triplets.emplace_back(row + r, col + c, jac(r, c));
                }
            }
        }
        row += dim;
    }

    system.jacobian.resize(total_rows, system.ordering.total_dim);
    system.jacobian.setFromTriplets(triplets.begin(), triplets.end());
    return system;
}

namespace {

Eigen::SparseMatrix<double> damped_information(const Eigen::SparseMatrix<double>& info,
                                               double lambda) {
    Eigen::SparseMatrix<double> damped = info;
    for (int i = 0; i < damped.rows(); ++i) {
        damped.coeffRef(i, i) = info.coeff(i, i) * (1.0 + lambda);
    }
    return damped;
}

}  // namespace

std::pair<Values, OptStats> optimize(const FactorGraph& graph, const Values& initial,
                                     const OptimizerConfig& config) {
    Values values = initial;
    OptStats stats;
    ErrorParts error = graph_error_parts(graph, values);
    stats.initial_error = error.total();
    stats.accepted_errors.push_back(stats.initial_error);
    double lambda = config.initial_lm_lambda;
    constexpr double kMaxLambda = 1e10;
    int small_decrease_streak = 0;

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        const LinearSystem system = linearize(graph, values);
        const Eigen::VectorXd gradient = system.jacobian.transpose() * system.residual;
        const Eigen::SparseMatrix<double> info =
            (system.jacobian.transpose() * system.jacobian).pruned();

        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
        if (iter == 0) {
            // A graph without a gauge prior yields a rank-deficient system;
            // detect it on the undamped information matrix. When a gauge
            // prior exists and every diagonal entry is positive, a failed
            // factorization is ill-conditioning rather than structural
            // deficiency, so retry once with a small diagonal bump.
            llt.compute(info);
            if (llt.info() != Eigen::Success) {
                bool has_prior = false;
                for (const Factor& factor : graph.factors()) {
                    if (std::holds_alternative<PriorPose2Factor>(factor)) {
                        has_prior = true;
                        break;
                    }
                }
                bool retried = false;
                if (has_prior && info.diagonal().minCoeff() > 0.0) {
                    Eigen::SparseMatrix<double> bumped = info;
                    const double bump = 1e-9 * std::max(1.0, info.diagonal().maxCoeff());
                    for (int i = 0; i < bumped.rows(); ++i) {
                        bumped.coeffRef(i, i) += bump;
                    }
                    llt.compute(bumped);
                    retried = llt.info() == Eigen::Success;
                }
                if (!retried) {
                    raise(ErrorCode::SingularSystem, "optimize: rank-deficient normal equations");
                }
            }
        }
        if (gradient.norm() <= 1e-6 * (1.0 + std::abs(error.total()))) {
            stats.converged = true;
            break;
        }

        bool accepted = false;
        while (lambda <= kMaxLambda) {
            llt.compute(damped_information(info, lambda));
            if (llt.info() == Eigen::Success) {
                const Eigen::VectorXd delta = llt.solve(-gradient);
                const Values candidate = retract_all(values, system.ordering, delta);
                ErrorParts candidate_error;
                try {
                    candidate_error = graph_error_parts(graph, candidate);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::CoincidentPoint) {
                        throw;
                    }
                    // Trial step drove a landmark onto a pose; treat as an
                    // unacceptable step, not a hard failure.
                    candidate_error.residual = std::numeric_limits<double>::infinity();
                }
                if (candidate_error.total() <= error.total() &&
                    std::isfinite(candidate_error.total())) {
                    const double decrease = error.total() - candidate_error.total();
                    values = candidate;
                    error = candidate_error;
                    stats.accepted_errors.push_back(error.total());
                    lambda = std::max(lambda / config.lm_lambda_factor, 1e-12);
                    accepted = true;
                    stats.iterations = iter + 1;
                    if (decrease <= std::max(config.absolute_error_tol,
                                             config.relative_decrease_tol * error.residual)) {
                        ++small_decrease_streak;
                    } else {
                        small_decrease_streak = 0;
                    }
                    break;
                }
            }
            lambda *= config.lm_lambda_factor;
        }
        if (!accepted || small_decrease_streak >= 3) {
            // Either damping is exhausted (no descending step exists) or the
            // error has stopped moving; both count as converged at the
            // numerical floor.
            stats.converged = true;
            if (!accepted) {
                stats.iterations = iter;
            }
            break;
        }
    }

    stats.final_error = error.total();
    return {values, stats};
}

namespace {

Eigen::SparseMatrix<double> information_matrix(const FactorGraph& graph, const Values& values,
                                               const VariableOrdering& ordering) {
    LinearSystem system = linearize(graph, values);
    (void)ordering;
    return (system.jacobian.transpose() * system.jacobian).pruned();
}

}  // namespace

MarginalSolver::MarginalSolver(const FactorGraph& graph, const Values& values)
    : ordering_(VariableOrdering::from_values(values)) {
    const Eigen::SparseMatrix<double> info = information_matrix(graph, values, ordering_);
    llt_.compute(info);
    if (llt_.info() != Eigen::Success) {
        // Transient near-degenerate linearizations (a landmark estimate
        // sliding close to a pose) can make the factorization fail
        // numerically; retry with a small diagonal regularizer before
        // declaring the system singular.
        Eigen::SparseMatrix<double> damped = info;
        const double bump = 1e-9 * std::max(1.0, info.diagonal().maxCoeff());
        for (int i = 0; i < damped.rows(); ++i) {
            damped.coeffRef(i, i) += bump;
        }
        llt_.compute(damped);
        if (llt_.info() != Eigen::Success) {
            raise(ErrorCode::SingularSystem,
                  "MarginalSolver: information matrix not positive definite");
        }
    }
}

Eigen::MatrixXd MarginalSolver::joint_covariance(std::span<const VariableId> ids) const {
    if (ids.empty()) {
        raise(ErrorCode::DomainError, "joint_covariance: no variables requested");
    }
    int block_dim = 0;
    for (const VariableId& id : ids) {
        block_dim += variable_dim(id);
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ordering_.total_dim, block_dim);
    int col = 0;
    for (const VariableId& id : ids) {
        const int off = ordering_.offset(id);
        for (int i = 0; i < variable_dim(id); ++i) {
            rhs(off + i, col++) = 1.0;
        }
    }
    const Eigen::MatrixXd solved = llt_.solve(rhs);
    Eigen::MatrixXd cov(block_dim, block_dim);
    int row = 0;
    for (const VariableId& id : ids) {
        const int off = ordering_.offset(id);
        cov.middleRows(row, variable_dim(id)) = solved.middleRows(off, variable_dim(id));
        row += variable_dim(id);
    }
    return cov;
}

std::vector<Eigen::Matrix<double, 5, 5>> MarginalSolver::pose_landmark_covariances(
    const VariableId& pose, std::span<const VariableId> landmarks) const {
    const int pose_off = ordering_.offset(pose);
    const int cols = 3 + 2 * static_cast<int>(landmarks.size());
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ordering_.total_dim, cols);
    rhs(pose_off, 0) = 1.0;
    rhs(pose_off + 1, 1) = 1.0;
    rhs(pose_off + 2, 2) = 1.0;
    for (std::size_t i = 0; i < landmarks.size(); ++i) {
        const int off = ordering_.offset(landmarks[i]);
        rhs(off, 3 + 2 * static_cast<int>(i)) = 1.0;
        rhs(off + 1, 4 + 2 * static_cast<int>(i)) = 1.0;
    }
    const Eigen::MatrixXd solved = llt_.solve(rhs);

    std::vector<Eigen::Matrix<double, 5, 5>> joints(landmarks.size());
    const Eigen::Matrix3d pose_cov = solved.block<3, 3>(pose_off, 0);
    for (std::size_t i = 0; i < landmarks.size(); ++i) {
        const int off = ordering_.offset(landmarks[i]);
        const int col = 3 + 2 * static_cast<int>(i);
        Eigen::Matrix<double, 5, 5>& joint = joints[i];
        joint.block<3, 3>(0, 0) = pose_cov;
        joint.block<3, 2>(0, 3) = solved.block<3, 2>(pose_off, col);
        joint.block<2, 3>(3, 0) = solved.block<2, 3>(off, 0);
        joint.block<2, 2>(3, 3) = solved.block<2, 2>(off, col);
    }
    return joints;
}

Eigen::MatrixXd joint_marginal_covariance(const FactorGraph& graph, const Values& values,
                                          std::span<const VariableId> ids) {
    return MarginalSolver(graph, values).joint_covariance(ids);
}

}  // namespace semslam
