#pragma once

#include <Eigen/Core>

#include "semslam/errors.hpp"

namespace semslam {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

/// Planar rigid-body pose. `theta` is kept in (-pi, pi] by every operation
/// that produces a Pose2.
struct Pose2 {
    double x{0.0};
    double y{0.0};
    double theta{0.0};

    Pose2() = default;
    Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(theta_) {}

    Eigen::Matrix2d rotation() const;
    Eigen::Vector2d translation() const { return {x, y}; }
};

using Point2 = Eigen::Vector2d;

/// Group composition a * b (apply b in the frame of a).
Pose2 se2_compose(const Pose2& a, const Pose2& b);

Pose2 se2_inverse(const Pose2& p);

/// Relative transform from a to b: inverse(a) * b.
Pose2 se2_between(const Pose2& a, const Pose2& b);

/// Exponential map of the tangent vector (rho_x, rho_y, phi).
Pose2 se2_exp(const Eigen::Vector3d& xi);

/// Logarithm map; inverse of se2_exp.
Eigen::Vector3d se2_log(const Pose2& p);

/// Manifold update used by the optimizer. The convention throughout this
/// library is right-multiplicative: retract(p, d) = p * exp(d), so the
/// tangent step is expressed in the body frame of p.
Pose2 se2_retract(const Pose2& p, const Eigen::Vector3d& delta);

struct RangeBearing {
    double range;
    double bearing;
};

struct RangeBearingJacobians {
    Eigen::Matrix<double, 2, 3> wrt_pose;   // right-multiplicative pose tangent
    Eigen::Matrix2d wrt_point;
};

/// Range and bearing from `pose` to `point`. Bearing is measured in the pose
/// frame, counterclockwise positive, wrapped to (-pi, pi]. Throws
/// CoincidentPoint when the point is within 1e-9 m of the pose position.
RangeBearing range_bearing(const Pose2& pose, const Point2& point,
                           RangeBearingJacobians* jacobians = nullptr);

/// Gaussian with explicit mean and covariance. Mostly a validation helper;
/// factor noise models carry bare covariance matrices.
struct Gaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    /// Throws NotPositiveDefinite / DomainError if cov is not symmetric SPD.
    void validate() const;
};

/// Negative log density of N(0, cov) at `residual`, including the
/// normalization constant:
///
///   0.5 * r^T cov^-1 r + 0.5 * log det(2 pi cov)
///
/// The constant term matters: mixture components with different covariances
/// are compared by these values.
double gaussian_nll(const Eigen::VectorXd& residual, const Eigen::MatrixXd& cov);

/// Inverse CDF of the chi-square distribution. dof == 2 uses the closed form
/// -2 log(1 - confidence); other dof bisect the regularized incomplete gamma
/// to 1e-10.
double chi2_quantile(double confidence, int dof);

/// Regularized lower incomplete gamma P(a, x); exposed for the chi-square
/// tests' quadrature cross-checks.
double regularized_gamma_p(double a, double x);

}  // namespace semslam
