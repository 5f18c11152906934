#pragma once

#include <cmath>

#include "taskrl/envsim/pursuit.hpp"
#include "taskrl/envsim/spread.hpp"
#include "taskrl/tasklayer/task.hpp"

namespace taskrl {

/// One GoLandmark task per landmark, one AvoidCollision task per ally,
/// in entity index order. Feature layout:
///   [1, 0, distance, sin(radial), cos(radial), vx, vy]   (go landmark)
///   [0, 1, distance, sin(radial), cos(radial), vx, vy]   (avoid collision)
/// with radial = atan2 of the entity relative to the agent. A zero-distance
/// entity reads as radial 0 (sin 0, cos 1).
inline TaskSet gen_tasks_spread(const SpreadObservation& obs) {
    TaskSet set;
    set.tasks.reserve(obs.landmark_rel.size() + obs.ally_rel.size());
    auto polar = [](Vec2 rel, double& dist, double& s, double& c) {
        dist = rel.norm();
        if (dist > 0.0) {
            s = rel.y / dist;
            c = rel.x / dist;
        } else {
            s = 0.0;
            c = 1.0;
        }
    };
    for (std::size_t l = 0; l < obs.landmark_rel.size(); ++l) {
        double d, s, c;
        polar(obs.landmark_rel[l], d, s, c);
        Task t;
        t.kind = TaskKind::GoLandmark;
        t.target = static_cast<int>(l);
        t.features = {1.0, 0.0, d, s, c, obs.vel.x, obs.vel.y};
        set.tasks.push_back(std::move(t));
    }
    for (std::size_t a = 0; a < obs.ally_rel.size(); ++a) {
        double d, s, c;
        polar(obs.ally_rel[a], d, s, c);
        Task t;
        t.kind = TaskKind::AvoidCollision;
        t.target = static_cast<int>(a);
        t.features = {0.0, 1.0, d, s, c, obs.vel.x, obs.vel.y};
        set.tasks.push_back(std::move(t));
    }
    return set;
}

/// Explore direction order (fixed): E, N, W, S.
inline constexpr int kExploreDirs = 4;

inline GridCell explore_delta(int dir) {
    switch (dir) {
        case 0: return {1, 0};   // east
        case 1: return {0, 1};   // north
        case 2: return {-1, 0};  // west
        case 3: return {0, -1};  // south
        default: throw ContractError("explore direction must be in [0, 4)");
    }
}

/// Four always-on Explore tasks followed by one PursueEvader task per
/// visible evader and one FollowAlly task per visible ally, scanning the
/// window x-major. Feature layout:
///   [1,0,0, 1,        sin(dir),    cos(dir),    mx, my]  (explore)
///   [0,1,0, d_norm,   sin(radial), cos(radial), mx, my]  (pursue evader)
///   [0,0,1, d_norm,   sin(radial), cos(radial), mx, my]  (follow ally)
/// where d_norm is the Chebyshev cell distance over the window radius, so a
/// window-edge entity reads 1.0 at every field of view.
inline TaskSet gen_tasks_pursuit(const PursuitObservation& obs) {
    TaskSet set;
    const double mx = static_cast<double>(obs.last_move.x);
    const double my = static_cast<double>(obs.last_move.y);
    // exact unit sin/cos for the four cardinal directions
    static constexpr double kSin[kExploreDirs] = {0.0, 1.0, 0.0, -1.0};
    static constexpr double kCos[kExploreDirs] = {1.0, 0.0, -1.0, 0.0};
    for (int dir = 0; dir < kExploreDirs; ++dir) {
        Task t;
        t.kind = TaskKind::Explore;
        t.target = dir;
        t.features = {1.0, 0.0, 0.0, 1.0, kSin[dir], kCos[dir], mx, my};
        set.tasks.push_back(std::move(t));
    }
    const int r = obs.radius();
    auto entity_task = [&](TaskKind kind, int dx, int dy) {
        const double cheb = static_cast<double>(std::max(std::abs(dx), std::abs(dy)));
        const double d_norm = cheb / static_cast<double>(r);
        const double hyp = std::sqrt(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy);
        Task t;
        t.kind = kind;
        t.target = obs.index(dx, dy);
        const double s = hyp > 0.0 ? dy / hyp : 0.0;
        const double c = hyp > 0.0 ? dx / hyp : 1.0;
        const double code = kind == TaskKind::PursueEvader ? 1.0 : 0.0;
        t.features = {0.0, code, 1.0 - code, d_norm, s, c, mx, my};
        set.tasks.push_back(std::move(t));
    };
    for (int dx = -r; dx <= r; ++dx)
        for (int dy = -r; dy <= r; ++dy)
            if (obs.evader_at(dx, dy)) entity_task(TaskKind::PursueEvader, dx, dy);
    for (int dx = -r; dx <= r; ++dx)
        for (int dy = -r; dy <= r; ++dy)
            if (obs.ally_at(dx, dy)) entity_task(TaskKind::FollowAlly, dx, dy);
    return set;
}

}  // namespace taskrl
