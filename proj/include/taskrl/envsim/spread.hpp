#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "taskrl/envsim/step_result.hpp"
#include "taskrl/errors.hpp"
#include "taskrl/numcore/rng.hpp"

namespace taskrl {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

/// Continuous cooperative navigation: agents cover landmarks while avoiding
/// mutual collisions. Soft-contact point-mass physics on an unbounded plane.
struct SpreadConfig {
    int n_agents = 3;  // landmark count equals agent count
    int max_steps = 25;
    double local_ratio = 0.5;

    // particle engine constants
    double dt = 0.1;
    double damping = 0.25;
    double sensitivity = 5.0;  // action force magnitude
    double contact_force = 100.0;
    double contact_margin = 1e-3;
    double agent_size = 0.15;  // agent-agent collision distance is twice this

    void validate() const {
        if (n_agents < 2) throw ConfigError("spread.n_agents must be >= 2");
        if (max_steps < 1) throw ConfigError("spread.max_steps must be >= 1");
        if (local_ratio < 0.0 || local_ratio > 1.0)
            throw ConfigError("spread.local_ratio must lie in [0, 1]");
    }
};

struct SpreadState {
    std::vector<Vec2> agent_pos;
    std::vector<Vec2> agent_vel;
    std::vector<Vec2> landmark_pos;
    int step = 0;
};

struct SpreadObservation {
    Vec2 pos;
    Vec2 vel;
    std::vector<Vec2> landmark_rel;  // landmark position minus own position
    std::vector<Vec2> ally_rel;      // other agents, original index order
};

/// Force exerted by a discrete action: {0 noop, 1 -x, 2 +x, 3 -y, 4 +y}.
inline Vec2 spread_action_force(int action, double sensitivity) {
    switch (action) {
        case 0: return {0.0, 0.0};
        case 1: return {-sensitivity, 0.0};
        case 2: return {+sensitivity, 0.0};
        case 3: return {0.0, -sensitivity};
        case 4: return {0.0, +sensitivity};
        default: throw ContractError("spread action must be in [0, 5)");
    }
}

/// Damped point-mass integration: velocity decays by (1 - damping), then the
/// force impulse is applied, then position advances with the new velocity.
inline void spread_integrate(Vec2& pos, Vec2& vel, Vec2 force, const SpreadConfig& cfg) {
    vel = vel * (1.0 - cfg.damping) + force * cfg.dt;
    pos += vel * cfg.dt;
}

/// Soft contact force on `a` from overlap with `b`; penetration follows
/// margin * log(1 + exp((r_min - d) / margin)).
inline Vec2 spread_contact_force(Vec2 pa, Vec2 pb, const SpreadConfig& cfg) {
    const Vec2 delta = pa - pb;
    const double dist = delta.norm();
    const double dmin = 2.0 * cfg.agent_size;
    const double k = cfg.contact_margin;
    // log1p(exp(z)) with overflow guard for deep penetration
    const double z = (dmin - dist) / k;
    const double pen = (z > 30.0 ? z : std::log1p(std::exp(z))) * k;
    const Vec2 dir = dist > 1e-12 ? delta * (1.0 / dist) : Vec2{1.0, 0.0};
    return dir * (cfg.contact_force * pen);
}

class SpreadEnv {
public:
    explicit SpreadEnv(SpreadConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    const SpreadConfig& config() const { return cfg_; }
    const SpreadState& state() const { return state_; }
    bool done() const { return done_; }
    int n_agents() const { return cfg_.n_agents; }
    static constexpr int kNumActions = 5;

    /// Installs an explicit state (replay and scenario construction).
    void load_state(SpreadState s) {
        if (static_cast<int>(s.agent_pos.size()) != cfg_.n_agents ||
            s.landmark_pos.size() != s.agent_pos.size() ||
            s.agent_vel.size() != s.agent_pos.size())
            throw ContractError("spread load_state: entity counts do not match config");
        state_ = std::move(s);
        done_ = state_.step >= cfg_.max_steps;
    }

    std::vector<SpreadObservation> reset(std::uint64_t seed) {
        rng_ = Rng(seed);
        const int n = cfg_.n_agents;
        state_.agent_pos.assign(n, {});
        state_.agent_vel.assign(n, {});
        state_.landmark_pos.assign(n, {});
        for (auto& p : state_.agent_pos) p = {rng_.uniform(-1.0, 1.0), rng_.uniform(-1.0, 1.0)};
        for (auto& p : state_.landmark_pos) p = {rng_.uniform(-1.0, 1.0), rng_.uniform(-1.0, 1.0)};
        state_.step = 0;
        done_ = false;
        return observe_all();
    }

    SpreadObservation observe(int agent) const {
        const int n = cfg_.n_agents;
        if (agent < 0 || agent >= n) throw ContractError("spread observe: bad agent index");
        SpreadObservation obs;
        obs.pos = state_.agent_pos[agent];
        obs.vel = state_.agent_vel[agent];
        obs.landmark_rel.reserve(n);
        for (const auto& lp : state_.landmark_pos) obs.landmark_rel.push_back(lp - obs.pos);
        obs.ally_rel.reserve(n - 1);
        for (int j = 0; j < n; ++j)
            if (j != agent) obs.ally_rel.push_back(state_.agent_pos[j] - obs.pos);
        return obs;
    }

    StepResult<SpreadObservation> step(const std::vector<int>& actions) {
        if (done_) throw ContractError("spread step: episode already terminated");
        const int n = cfg_.n_agents;
        if (static_cast<int>(actions.size()) != n)
            throw ContractError("spread step: need one action per agent");

        std::vector<Vec2> force(n);
        for (int i = 0; i < n; ++i) force[i] = spread_action_force(actions[i], cfg_.sensitivity);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const Vec2 f = spread_contact_force(state_.agent_pos[i], state_.agent_pos[j], cfg_);
                force[i] += f;
                force[j] += f * -1.0;
            }
        for (int i = 0; i < n; ++i)
            spread_integrate(state_.agent_pos[i], state_.agent_vel[i], force[i], cfg_);

        state_.step += 1;
        done_ = state_.step >= cfg_.max_steps;

        StepResult<SpreadObservation> result;
        result.terminated = done_;
        result.rewards.assign(n, 0.0);

        double global = 0.0;
        for (const auto& lp : state_.landmark_pos) {
            double best = (state_.agent_pos[0] - lp).norm();
            for (int i = 1; i < n; ++i) best = std::min(best, (state_.agent_pos[i] - lp).norm());
            global -= best;
        }
        const double dmin = 2.0 * cfg_.agent_size;
        int total_collisions = 0;
        for (int i = 0; i < n; ++i) {
            double local = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                if ((state_.agent_pos[i] - state_.agent_pos[j]).norm() < dmin) {
                    local -= 1.0;
                    ++total_collisions;
                }
            }
            result.rewards[i] = (1.0 - cfg_.local_ratio) * global + cfg_.local_ratio * local;
        }
        result.info["global_reward"] = global;
        result.info["collisions"] = static_cast<double>(total_collisions);
        result.observations = observe_all();
        return result;
    }

private:
    std::vector<SpreadObservation> observe_all() const {
        std::vector<SpreadObservation> obs;
        obs.reserve(cfg_.n_agents);
        for (int i = 0; i < cfg_.n_agents; ++i) obs.push_back(observe(i));
        return obs;
    }

    SpreadConfig cfg_;
    SpreadState state_;
    Rng rng_{0};
    bool done_ = false;
};

}  // namespace taskrl
