#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "semslam/geometry.hpp"
#include "semslam/values.hpp"

namespace semslam {

/// Residual of a (range, bearing) measurement: prediction minus measurement,
/// bearing difference wrapped. Shared by the plain range-bearing factor and
/// every mixture component so that a single-component mixture reproduces the
/// plain factor bit for bit.
Eigen::Vector2d range_bearing_residual(const Pose2& pose, const Point2& landmark, double range,
                                       double bearing, RangeBearingJacobians* jacobians = nullptr);

/// Max-mixture factor over candidate landmark associations of one measurement.
///
/// Component weights are the association probabilities computed when the
/// measurement arrived; they are frozen at construction and never revisited.
/// Only the max over components switches as the estimate moves. The optional
/// null component models "matches no landmark" as a Gaussian on the same
/// residual with isotropic standard deviation `null_sigma` per whitened
/// coordinate; it predicts against the first component's landmark, which makes
/// its density effectively constant and its gradient contribution negligible.
struct SemanticMaxMixtureFactor {
    struct Component {
        VariableId landmark;
        double weight{1.0};
        Eigen::Matrix2d cov{Eigen::Matrix2d::Identity()};
    };

    VariableId pose;
    double range{0.0};
    double bearing{0.0};
    std::vector<Component> components;
    double null_weight{0.0};
    double null_sigma{1e5};

    bool has_null() const { return null_weight > 0.0; }
    /// Candidate components first, then the null component when present.
    int num_components() const {
        return static_cast<int>(components.size()) + (has_null() ? 1 : 0);
    }
    bool is_null_component(int index) const {
        return has_null() && index == static_cast<int>(components.size());
    }

    /// Weights (incl. null) must sum to 1 +- 1e-9; at least one component;
    /// null_sigma >= 1e3.
    void validate() const;
};

/// Negative log of w_j * N(residual_j; 0, cov_j) for one component.
double mixture_component_nll(const SemanticMaxMixtureFactor& factor, const Values& values,
                             int component);

/// Dominant component: argmin of component NLL, ties toward the lowest index.
/// Returns (index, nll).
std::pair<int, double> select_component(const SemanticMaxMixtureFactor& factor,
                                        const Values& values);

struct MixtureLinearization {
    int selected{0};
    VariableId landmark;
    Eigen::Vector2d whitened_residual;
    Eigen::Matrix<double, 2, 3> whitened_jac_pose;
    Eigen::Matrix2d whitened_jac_landmark;
    /// -log w + 0.5 log det(2 pi cov) of the selected component; carried in
    /// the objective so that component switches compare total NLL correctly.
    double constant{0.0};
};

/// Re-selects the dominant component at `values` and returns its whitened
/// residual and Jacobians.
MixtureLinearization mixture_linearize(const SemanticMaxMixtureFactor& factor,
                                       const Values& values);

}  // namespace semslam
