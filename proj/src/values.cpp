#include "semslam/values.hpp"

#include "semslam/errors.hpp"

namespace semslam {

std::string to_string(const VariableId& id) {
    return (id.kind == VariableKind::Pose ? "x" : "l") + std::to_string(id.index);
}

const Pose2& Values::pose(const VariableId& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) {
        raise(ErrorCode::MissingVariable, "Values: missing variable " + to_string(id));
    }
    const Pose2* p = std::get_if<Pose2>(&it->second);
    if (p == nullptr) {
        raise(ErrorCode::DomainError, "Values: " + to_string(id) + " is not a pose");
    }
    return *p;
}

const Point2& Values::landmark(const VariableId& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) {
        raise(ErrorCode::MissingVariable, "Values: missing variable " + to_string(id));
    }
    const Point2* p = std::get_if<Point2>(&it->second);
    if (p == nullptr) {
        raise(ErrorCode::DomainError, "Values: " + to_string(id) + " is not a landmark");
    }
    return *p;
}

VariableOrdering VariableOrdering::from_values(const Values& values) {
    VariableOrdering ordering;
    ordering.ids.reserve(values.size());
    for (const auto& [id, entry] : values.entries()) {
        ordering.offsets[id] = ordering.total_dim;
        ordering.ids.push_back(id);
        ordering.total_dim += variable_dim(id);
    }
    return ordering;
}

int VariableOrdering::offset(const VariableId& id) const {
    auto it = offsets.find(id);
    if (it == offsets.end()) {
        raise(ErrorCode::MissingVariable, "VariableOrdering: missing variable " + to_string(id));
    }
    return it->second;
}

Values retract_all(const Values& values, const VariableOrdering& ordering,
                   const Eigen::VectorXd& delta) {
    if (delta.size() != ordering.total_dim) {
        raise(ErrorCode::DomainError, "retract_all: step dimension mismatch");
    }
    Values out = values;
    for (const VariableId& id : ordering.ids) {
        const int off = ordering.offset(id);
        if (id.kind == VariableKind::Pose) {
            out.insert_pose(id.index, se2_retract(values.pose(id), delta.segment<3>(off)));
        } else {
            out.insert_landmark(id.index, values.landmark(id) + delta.segment<2>(off));
        }
    }
    return out;
}

}  // namespace semslam
