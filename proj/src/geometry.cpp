#include "semslam/geometry.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

namespace semslam {

double wrap_angle(double angle) {
    if (!std::isfinite(angle)) {
        raise(ErrorCode::DomainError, "wrap_angle: non-finite angle");
    }
    // remainder() lands in [-pi, pi]; fold the open end onto +pi.
    double wrapped = std::remainder(angle, 2.0 * kPi);
    if (wrapped <= -kPi) {
        wrapped += 2.0 * kPi;
    }
    return wrapped;
}

Eigen::Matrix2d Pose2::rotation() const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Eigen::Matrix2d rot;
    rot << c, -s, s, c;
    return rot;
}

Pose2 se2_compose(const Pose2& a, const Pose2& b) {
    const double c = std::cos(a.theta);
    const double s = std::sin(a.theta);
    return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, wrap_angle(a.theta + b.theta)};
}

Pose2 se2_inverse(const Pose2& p) {
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    return {-(c * p.x + s * p.y), -(-s * p.x + c * p.y), wrap_angle(-p.theta)};
}

Pose2 se2_between(const Pose2& a, const Pose2& b) {
    return se2_compose(se2_inverse(a), b);
}

Pose2 se2_exp(const Eigen::Vector3d& xi) {
    const double rx = xi[0];
    const double ry = xi[1];
    const double phi = xi[2];
    double a;  // sin(phi)/phi
    double b;  // (1 - cos(phi))/phi
    if (std::abs(phi) < 1e-9) {
        a = 1.0 - phi * phi / 6.0;
        b = phi / 2.0 - phi * phi * phi / 24.0;
    } else {
        a = std::sin(phi) / phi;
        b = (1.0 - std::cos(phi)) / phi;
    }
    return {a * rx - b * ry, b * rx + a * ry, wrap_angle(phi)};
}

Eigen::Vector3d se2_log(const Pose2& p) {
    const double phi = p.theta;
    double a;
    double b;
    if (std::abs(phi) < 1e-9) {
        a = 1.0 - phi * phi / 6.0;
        b = phi / 2.0 - phi * phi * phi / 24.0;
    } else {
        a = std::sin(phi) / phi;
        b = (1.0 - std::cos(phi)) / phi;
    }
    const double det = a * a + b * b;
    return {(a * p.x + b * p.y) / det, (-b * p.x + a * p.y) / det, phi};
}

Pose2 se2_retract(const Pose2& p, const Eigen::Vector3d& delta) {
    if (!delta.allFinite()) {
        raise(ErrorCode::DomainError, "se2_retract: non-finite tangent step");
    }
    return se2_compose(p, se2_exp(delta));
}

RangeBearing range_bearing(const Pose2& pose, const Point2& point, RangeBearingJacobians* jacobians) {
    const Eigen::Matrix2d rot = pose.rotation();
    const Eigen::Vector2d local = rot.transpose() * (point - pose.translation());
    const double range = local.norm();
    if (range <= 1e-9) {
        raise(ErrorCode::CoincidentPoint, "range_bearing: point coincides with pose position");
    }
    const double bearing = wrap_angle(std::atan2(local.y(), local.x()));
    if (jacobians != nullptr) {
        const double r2 = range * range;
        // d(local)/d(rho) = -I, d(local)/d(phi) = [local.y, -local.x],
        // d(local)/d(point) = R^T; chain through range = |local| and
        // bearing = atan2(local.y, local.x).
        const Eigen::RowVector2d drange_dlocal = local.transpose() / range;
        const Eigen::RowVector2d dbearing_dlocal(-local.y() / r2, local.x() / r2);
        jacobians->wrt_pose.block<1, 2>(0, 0) = -drange_dlocal;
        jacobians->wrt_pose(0, 2) = 0.0;
        jacobians->wrt_pose.block<1, 2>(1, 0) = -dbearing_dlocal;
        jacobians->wrt_pose(1, 2) = -1.0;
        jacobians->wrt_point.row(0) = drange_dlocal * rot.transpose();
        jacobians->wrt_point.row(1) = dbearing_dlocal * rot.transpose();
    }
    return {range, bearing};
}

void Gaussian::validate() const {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size()) {
        raise(ErrorCode::DomainError, "Gaussian: dimension mismatch");
    }
    if (!mean.allFinite() || !cov.allFinite()) {
        raise(ErrorCode::DomainError, "Gaussian: non-finite entries");
    }
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        raise(ErrorCode::NotPositiveDefinite, "Gaussian: covariance not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        raise(ErrorCode::NotPositiveDefinite, "Gaussian: covariance not positive definite");
    }
}

double gaussian_nll(const Eigen::VectorXd& residual, const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols() || cov.rows() != residual.size()) {
        raise(ErrorCode::DomainError, "gaussian_nll: dimension mismatch");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        raise(ErrorCode::NotPositiveDefinite, "gaussian_nll: covariance not positive definite");
    }
    const Eigen::VectorXd whitened = llt.matrixL().solve(residual);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
        log_det += 2.0 * std::log(llt.matrixL()(i, i));
    }
    const double dim = static_cast<double>(residual.size());
    return 0.5 * whitened.squaredNorm() + 0.5 * (log_det + dim * std::log(2.0 * kPi));
}

namespace {

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) = 1 - P(a, x), valid for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
    const double tiny = std::numeric_limits<double>::min() / 1e-30;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) {
            break;
        }
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) {
        raise(ErrorCode::DomainError, "regularized_gamma_p: invalid arguments");
    }
    if (x == 0.0) {
        return 0.0;
    }
    if (x < a + 1.0) {
        return gamma_p_series(a, x);
    }
    return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi2_quantile(double confidence, int dof) {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        raise(ErrorCode::DomainError, "chi2_quantile: confidence must be in (0, 1)");
    }
    if (dof < 1) {
        raise(ErrorCode::DomainError, "chi2_quantile: dof must be >= 1");
    }
    if (dof == 2) {
        return -2.0 * std::log1p(-confidence);
    }
    const double half_dof = 0.5 * static_cast<double>(dof);
    auto cdf = [half_dof](double x) { return regularized_gamma_p(half_dof, 0.5 * x); };
    double lo = 0.0;
    double hi = static_cast<double>(dof);
    while (cdf(hi) < confidence) {
        hi *= 2.0;
        if (hi > 1e12) {
            raise(ErrorCode::DomainError, "chi2_quantile: quantile out of range");
        }
    }
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < confidence) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace semslam
