#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "taskrl/errors.hpp"
#include "taskrl/numcore/tensor.hpp"

namespace taskrl {

enum class TaskKind { GoLandmark, AvoidCollision, Explore, PursueEvader, FollowAlly };

inline std::string to_string(TaskKind k) {
    switch (k) {
        case TaskKind::GoLandmark: return "go_landmark";
        case TaskKind::AvoidCollision: return "avoid_collision";
        case TaskKind::Explore: return "explore";
        case TaskKind::PursueEvader: return "pursue_evader";
        case TaskKind::FollowAlly: return "follow_ally";
    }
    return "?";
}

/// One expert-defined candidate action. `features` carries the full policy
/// input: the one-hot type code prefix followed by the numeric features.
/// `target` identifies the entity the task refers to (landmark/ally index in
/// Spread, window cell index in Pursuit, direction index for Explore).
struct Task {
    TaskKind kind = TaskKind::GoLandmark;
    std::vector<double> features;
    int target = -1;
};

inline constexpr int kSpreadFeatureLen = 7;   // [onehot2, dist, sin, cos, vx, vy]
inline constexpr int kPursuitFeatureLen = 8;  // [onehot3, dist, sin, cos, mx, my]

/// Ordered list of candidate tasks for one agent at one step.
struct TaskSet {
    std::vector<Task> tasks;

    bool empty() const { return tasks.empty(); }
    std::size_t size() const { return tasks.size(); }
    const Task& operator[](std::size_t i) const { return tasks[i]; }

    int feature_len() const {
        return tasks.empty() ? 0 : static_cast<int>(tasks.front().features.size());
    }

    Tensor to_matrix() const {
        if (tasks.empty()) throw ContractError("TaskSet: empty set has no matrix");
        const std::size_t d = tasks.front().features.size();
        Tensor m(tasks.size(), d);
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (tasks[i].features.size() != d)
                throw ContractError("TaskSet: inconsistent feature lengths");
            for (std::size_t j = 0; j < d; ++j) m(i, j) = tasks[i].features[j];
        }
        return m;
    }
};

/// Validates the one-hot prefix and the sin/cos unit-norm invariant.
inline void validate_task(const Task& t, int onehot_len, int feature_len) {
    if (static_cast<int>(t.features.size()) != feature_len)
        throw ContractError("task: feature length " + std::to_string(t.features.size()) +
                            ", expected " + std::to_string(feature_len));
    int ones = 0;
    for (int i = 0; i < onehot_len; ++i) {
        if (t.features[i] != 0.0 && t.features[i] != 1.0)
            throw ContractError("task: type code entries must be 0 or 1");
        if (t.features[i] == 1.0) ++ones;
    }
    if (ones != 1) throw ContractError("task: type code must have exactly one 1");
    const double s = t.features[onehot_len + 1];
    const double c = t.features[onehot_len + 2];
    if (std::abs(s * s + c * c - 1.0) > 1e-9)
        throw ContractError("task: sin^2+cos^2 deviates from 1");
}

}  // namespace taskrl
