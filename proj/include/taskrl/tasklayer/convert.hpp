#pragma once

#include <cmath>
#include <cstdlib>

#include "taskrl/envsim/pursuit.hpp"
#include "taskrl/envsim/spread.hpp"
#include "taskrl/tasklayer/task.hpp"

namespace taskrl {

/// Constants of the expert task-to-action rules. PD gains steer the
/// go-landmark controller; the split constants bias pursuers away from
/// crowding an ally when close.
struct ConverterParams {
    double pd_kp = 1.0;
    double pd_kd = 0.8;
    double pd_deadband = 0.05;
    int split_radius = 2;
    double split_penalty = 0.5;
};

namespace detail {

/// Highest-dot-product axis action for a desired direction; exact ties go to
/// the lower action index. Action dirs: 1 -x, 2 +x, 3 -y, 4 +y.
inline int best_axis_action(Vec2 dir) {
    const double dots[4] = {-dir.x, dir.x, -dir.y, dir.y};
    int best = 1;
    double best_dot = dots[0];
    for (int a = 1; a < 4; ++a)
        if (dots[a] > best_dot + 1e-12) {
            best_dot = dots[a];
            best = a + 1;
        }
    return best;
}

}  // namespace detail

/// Per-axis PD control toward the landmark; noop inside the deadband, else
/// the axis action best aligned with the commanded force.
inline int convert_spread_go_landmark(const Task& task, const SpreadObservation& obs,
                                      const ConverterParams& p = {}) {
    if (task.kind != TaskKind::GoLandmark)
        throw ContractError("convert_spread_go_landmark: wrong task kind");
    const Vec2 err = obs.landmark_rel[task.target];
    const Vec2 f{p.pd_kp * err.x - p.pd_kd * obs.vel.x, p.pd_kp * err.y - p.pd_kd * obs.vel.y};
    if (f.norm() < p.pd_deadband) return 0;
    return detail::best_axis_action(f);
}

/// Steers perpendicular (counterclockwise) to the ally bearing.
inline int convert_spread_avoid(const Task& task, const SpreadObservation& obs,
                                const ConverterParams& = {}) {
    if (task.kind != TaskKind::AvoidCollision)
        throw ContractError("convert_spread_avoid: wrong task kind");
    const Vec2 rel = obs.ally_rel[task.target];
    // rotating (x, y) by +90 degrees gives (-y, x); no trig needed
    return detail::best_axis_action({-rel.y, rel.x});
}

/// Explore directions map one-to-one onto grid moves.
inline int convert_pursuit_explore(const Task& task, const ConverterParams& = {}) {
    if (task.kind != TaskKind::Explore)
        throw ContractError("convert_pursuit_explore: wrong task kind");
    switch (task.target) {
        case 0: return 1;  // E -> +x
        case 1: return 3;  // N -> +y
        case 2: return 2;  // W -> -x
        case 3: return 4;  // S -> -y
        default: throw ContractError("convert_pursuit_explore: bad direction");
    }
}

namespace detail {

/// Where a move lands, as seen in the window: wall moves fall back to stay.
inline GridCell resulting_cell(const PursuitObservation& obs, int action) {
    const GridCell d = pursuit_move_delta(action);
    if (action != 0 && obs.wall_at(d.x, d.y)) return {0, 0};
    return d;
}

}  // namespace detail

/// Chebyshev-descent toward the target evader with a crowding penalty:
/// when an ally is within split_radius cells, moves landing cardinal-adjacent
/// to that ally cost split_penalty extra. Ties go to the lower action index.
inline int convert_pursuit_pursue(const Task& task, const PursuitObservation& obs,
                                  const ConverterParams& p = {}) {
    if (task.kind != TaskKind::PursueEvader)
        throw ContractError("convert_pursuit_pursue: wrong task kind");
    const int r = obs.radius();
    const int ex = task.target / obs.range - r;
    const int ey = task.target % obs.range - r;

    std::vector<GridCell> near_allies;
    const int sr = std::min(p.split_radius, r);
    for (int dx = -sr; dx <= sr; ++dx)
        for (int dy = -sr; dy <= sr; ++dy)
            if (obs.ally_at(dx, dy)) near_allies.push_back({dx, dy});

    int best = 0;
    double best_score = 0.0;
    for (int a = 0; a < 5; ++a) {
        const GridCell c = detail::resulting_cell(obs, a);
        double score = std::max(std::abs(ex - c.x), std::abs(ey - c.y));
        for (const GridCell& ally : near_allies) {
            const int manhattan = std::abs(ally.x - c.x) + std::abs(ally.y - c.y);
            if (manhattan == 1) score += p.split_penalty;
        }
        if (a == 0 || score < best_score) {
            best_score = score;
            best = a;
        }
    }
    return best;
}

/// Chebyshev-descent toward the target ally, never stepping onto its cell.
inline int convert_pursuit_follow(const Task& task, const PursuitObservation& obs,
                                  const ConverterParams& = {}) {
    if (task.kind != TaskKind::FollowAlly)
        throw ContractError("convert_pursuit_follow: wrong task kind");
    const int r = obs.radius();
    const int ax = task.target / obs.range - r;
    const int ay = task.target % obs.range - r;

    int best = 0;
    double best_score = 0.0;
    bool have = false;
    for (int a = 0; a < 5; ++a) {
        const GridCell c = detail::resulting_cell(obs, a);
        if (c.x == ax && c.y == ay) continue;  // cannot stack on the ally
        const double score = std::max(std::abs(ax - c.x), std::abs(ay - c.y));
        if (!have || score < best_score) {
            best_score = score;
            best = a;
            have = true;
        }
    }
    return best;
}

/// Dispatch for a selected task.
inline int convert_spread(const Task& task, const SpreadObservation& obs,
                          const ConverterParams& p = {}) {
    return task.kind == TaskKind::GoLandmark ? convert_spread_go_landmark(task, obs, p)
                                             : convert_spread_avoid(task, obs, p);
}

inline int convert_pursuit(const Task& task, const PursuitObservation& obs,
                           const ConverterParams& p = {}) {
    switch (task.kind) {
        case TaskKind::Explore: return convert_pursuit_explore(task, p);
        case TaskKind::PursueEvader: return convert_pursuit_pursue(task, obs, p);
        case TaskKind::FollowAlly: return convert_pursuit_follow(task, obs, p);
        default: throw ContractError("convert_pursuit: not a pursuit task");
    }
}

}  // namespace taskrl
