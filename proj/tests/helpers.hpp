#pragma once

#include <Eigen/Core>
#include <functional>
#include <random>

#include "semslam/geometry.hpp"

namespace semslam::test {

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64{seed};
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Pose2 random_pose(std::mt19937_64& rng, double span = 10.0) {
    return {uniform(rng, -span, span), uniform(rng, -span, span), uniform(rng, -kPi, kPi)};
}

inline Point2 random_point(std::mt19937_64& rng, double span = 10.0) {
    return {uniform(rng, -span, span), uniform(rng, -span, span)};
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int dim, double scale = 1.0) {
    Eigen::MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            a(i, j) = uniform(rng, -1.0, 1.0);
        }
    }
    return scale * (a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(dim, dim));
}

/// Central finite differences of a vector function over a flat parameter
/// vector; the caller provides the perturbation rule.
inline Eigen::MatrixXd finite_difference(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, int input_dim,
    double step = 1e-6) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(input_dim);
    const Eigen::VectorXd f0 = f(zero);
    Eigen::MatrixXd jac(f0.size(), input_dim);
    for (int i = 0; i < input_dim; ++i) {
        Eigen::VectorXd plus = zero;
        Eigen::VectorXd minus = zero;
        plus[i] += step;
        minus[i] -= step;
        const Eigen::VectorXd fp = f(plus);
        const Eigen::VectorXd fm = f(minus);
        for (int r = 0; r < f0.size(); ++r) {
            double diff = fp[r] - fm[r];
            jac(r, i) = diff / (2.0 * step);
        }
    }
    return jac;
}

/// Same, but wraps each output difference as an angle (for bearing/theta
/// residual rows that may cross the +-pi boundary).
inline Eigen::MatrixXd finite_difference_wrapped(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, int input_dim,
    double step = 1e-6) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(input_dim);
    const Eigen::VectorXd f0 = f(zero);
    Eigen::MatrixXd jac(f0.size(), input_dim);
    for (int i = 0; i < input_dim; ++i) {
        Eigen::VectorXd plus = zero;
        Eigen::VectorXd minus = zero;
        plus[i] += step;
        minus[i] -= step;
        const Eigen::VectorXd fp = f(plus);
        const Eigen::VectorXd fm = f(minus);
        for (int r = 0; r < f0.size(); ++r) {
            jac(r, i) = wrap_angle(fp[r] - fm[r]) / (2.0 * step);
        }
    }
    return jac;
}

}  // namespace semslam::test
