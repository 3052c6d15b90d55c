#pragma once

#include <Eigen/Core>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "semslam/geometry.hpp"

namespace semslam {

enum class VariableKind : std::uint8_t { Pose, Landmark };

/// Identifies one variable of the estimation problem. Pose indices are time
/// steps, landmark indices are map entries; each kind has its own index space.
struct VariableId {
    VariableKind kind{VariableKind::Pose};
    std::int32_t index{0};

    friend auto operator<=>(const VariableId&, const VariableId&) = default;

    static VariableId pose(std::int32_t t) { return {VariableKind::Pose, t}; }
    static VariableId landmark(std::int32_t j) { return {VariableKind::Landmark, j}; }
};

std::string to_string(const VariableId& id);

/// Tangent dimension: 3 for poses, 2 for landmarks.
inline int variable_dim(const VariableId& id) {
    return id.kind == VariableKind::Pose ? 3 : 2;
}

/// Estimate container mapping variables to Pose2 / Point2 values. Iteration
/// order is sorted by (kind, index), which fixes the column ordering of every
/// linear system built from these values.
class Values {
  public:
    using Entry = std::variant<Pose2, Point2>;

    bool has(const VariableId& id) const { return entries_.count(id) > 0; }
    std::size_t size() const { return entries_.size(); }

    void insert_pose(std::int32_t t, const Pose2& pose) { entries_[VariableId::pose(t)] = pose; }
    void insert_landmark(std::int32_t j, const Point2& point) {
        entries_[VariableId::landmark(j)] = point;
    }

    /// Throws MissingVariable / DomainError on absent id or kind mismatch.
    const Pose2& pose(const VariableId& id) const;
    const Point2& landmark(const VariableId& id) const;

    const std::map<VariableId, Entry>& entries() const { return entries_; }

  private:
    std::map<VariableId, Entry> entries_;
};

/// Column layout of the stacked tangent space over a set of values.
struct VariableOrdering {
    std::vector<VariableId> ids;
    std::map<VariableId, int> offsets;
    int total_dim{0};

    static VariableOrdering from_values(const Values& values);

    int offset(const VariableId& id) const;
};

/// Applies a stacked tangent step: poses via se2_retract, landmarks additively.
Values retract_all(const Values& values, const VariableOrdering& ordering,
                   const Eigen::VectorXd& delta);

}  // namespace semslam
