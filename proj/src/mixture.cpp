#include "semslam/mixture.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "semslam/errors.hpp"

namespace semslam {

Eigen::Vector2d range_bearing_residual(const Pose2& pose, const Point2& landmark, double range,
                                       double bearing, RangeBearingJacobians* jacobians) {
    const RangeBearing predicted = range_bearing(pose, landmark, jacobians);
    return {predicted.range - range, wrap_angle(predicted.bearing - bearing)};
}

void SemanticMaxMixtureFactor::validate() const {
    if (components.empty()) {
        raise(ErrorCode::DomainError, "mixture factor: no components");
    }
    double total = null_weight;
    for (const Component& c : components) {
        if (!(c.weight > 0.0)) {
            raise(ErrorCode::DomainError, "mixture factor: non-positive component weight");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        raise(ErrorCode::DomainError, "mixture factor: weights do not sum to 1");
    }
    if (has_null() && null_sigma < 1e3) {
        raise(ErrorCode::DomainError, "mixture factor: null_sigma below 1e3");
    }
}

namespace {

Eigen::Vector2d component_residual(const SemanticMaxMixtureFactor& factor, const Values& values,
                                   int component, RangeBearingJacobians* jacobians,
                                   VariableId* landmark_out) {
    const VariableId landmark = factor.is_null_component(component)
                                    ? factor.components.front().landmark
                                    : factor.components[static_cast<std::size_t>(component)].landmark;
    if (landmark_out != nullptr) {
        *landmark_out = landmark;
    }
    return range_bearing_residual(values.pose(factor.pose), values.landmark(landmark),
                                  factor.range, factor.bearing, jacobians);
}

}  // namespace

double mixture_component_nll(const SemanticMaxMixtureFactor& factor, const Values& values,
                             int component) {
    if (component < 0 || component >= factor.num_components()) {
        raise(ErrorCode::DomainError, "mixture_component_nll: component index out of range");
    }
    const Eigen::Vector2d residual = component_residual(factor, values, component, nullptr, nullptr);
    if (factor.is_null_component(component)) {
        const double var = factor.null_sigma * factor.null_sigma;
        return -std::log(factor.null_weight) + 0.5 * residual.squaredNorm() / var +
               std::log(2.0 * kPi * var);
    }
    const auto& c = factor.components[static_cast<std::size_t>(component)];
    return -std::log(c.weight) + gaussian_nll(residual, c.cov);
}

std::pair<int, double> select_component(const SemanticMaxMixtureFactor& factor,
                                        const Values& values) {
    int best = -1;
    double best_nll = std::numeric_limits<double>::infinity();
    for (int i = 0; i < factor.num_components(); ++i) {
        const double nll = mixture_component_nll(factor, values, i);
        if (nll < best_nll) {
            best = i;
            best_nll = nll;
        }
    }
    return {best, best_nll};
}

MixtureLinearization mixture_linearize(const SemanticMaxMixtureFactor& factor,
                                       const Values& values) {
    MixtureLinearization lin;
    lin.selected = select_component(factor, values).first;

    RangeBearingJacobians jac;
    const Eigen::Vector2d residual =
        component_residual(factor, values, lin.selected, &jac, &lin.landmark);

    if (factor.is_null_component(lin.selected)) {
        const double inv_sigma = 1.0 / factor.null_sigma;
        lin.whitened_residual = residual * inv_sigma;
        lin.whitened_jac_pose = jac.wrt_pose * inv_sigma;
        lin.whitened_jac_landmark = jac.wrt_point * inv_sigma;
        lin.constant = -std::log(factor.null_weight) +
                       std::log(2.0 * kPi * factor.null_sigma * factor.null_sigma);
        return lin;
    }

    const auto& c = factor.components[static_cast<std::size_t>(lin.selected)];
    Eigen::LLT<Eigen::Matrix2d> llt(c.cov);
    if (llt.info() != Eigen::Success) {
        raise(ErrorCode::NotPositiveDefinite, "mixture_linearize: component covariance not SPD");
    }
    lin.whitened_residual = llt.matrixL().solve(residual);
    lin.whitened_jac_pose = llt.matrixL().solve(jac.wrt_pose);
    lin.whitened_jac_landmark = llt.matrixL().solve(jac.wrt_point);
    const double log_det = 2.0 * std::log(llt.matrixL()(0, 0)) + 2.0 * std::log(llt.matrixL()(1, 1));
    lin.constant = -std::log(c.weight) + 0.5 * (log_det + 2.0 * std::log(2.0 * kPi));
    return lin;
}

}  // namespace semslam
