#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "taskrl/envsim/step_result.hpp"
#include "taskrl/errors.hpp"
#include "taskrl/numcore/rng.hpp"

namespace taskrl {

struct GridCell {
    int x = 0, y = 0;
    bool operator==(const GridCell&) const = default;
};

/// Grid predator-prey: pursuers trap randomly drifting evaders. An evader is
/// caught when every traversable cardinal neighbor of its cell is held by a
/// pursuer.
struct PursuitConfig {
    int grid_w = 16;
    int grid_h = 16;
    int n_pursuers = 8;
    int n_evaders = 30;
    int obs_range = 7;  // odd window edge length
    int max_cycles = 500;
    double catch_reward = 5.0;
    double tag_reward = 0.01;
    double urgency_reward = -0.1;

    void validate() const {
        if (obs_range < 3 || obs_range % 2 == 0)
            throw ConfigError("pursuit.obs_range must be odd and >= 3");
        if (n_pursuers < 1 || n_evaders < 1)
            throw ConfigError("pursuit requires at least one pursuer and one evader");
        if (max_cycles < 1) throw ConfigError("pursuit.max_cycles must be >= 1");
        if (grid_w < 4 || grid_h < 4) throw ConfigError("pursuit grid must be at least 4x4");
        const int traversable = grid_w * grid_h - 4;  // central 2x2 obstacle
        if (traversable < n_pursuers + n_evaders)
            throw ConfigError("pursuit grid too small for all entities plus obstacle");
    }
};

struct PursuitState {
    std::vector<std::uint8_t> obstacle;  // grid_w * grid_h, x-major
    std::vector<GridCell> pursuers;
    std::vector<GridCell> evaders;
    std::vector<std::uint8_t> alive;
    std::vector<GridCell> last_move;  // unit direction of each pursuer's last actual move
    int step = 0;
};

/// Square window centered on the agent; three boolean channels in x-major
/// window coordinates (index = (dx + r) * range + (dy + r)). Off-grid cells
/// read as wall.
struct PursuitObservation {
    int range = 0;
    std::vector<std::uint8_t> wall;
    std::vector<std::uint8_t> ally;
    std::vector<std::uint8_t> evader;
    GridCell last_move;

    int radius() const { return range / 2; }
    int index(int dx, int dy) const { return (dx + radius()) * range + (dy + radius()); }
    bool wall_at(int dx, int dy) const { return wall[index(dx, dy)] != 0; }
    bool ally_at(int dx, int dy) const { return ally[index(dx, dy)] != 0; }
    bool evader_at(int dx, int dy) const { return evader[index(dx, dy)] != 0; }
};

/// Pursuit moves: {0 stay, 1 +x, 2 -x, 3 +y, 4 -y}.
inline GridCell pursuit_move_delta(int action) {
    switch (action) {
        case 0: return {0, 0};
        case 1: return {1, 0};
        case 2: return {-1, 0};
        case 3: return {0, 1};
        case 4: return {0, -1};
        default: throw ContractError("pursuit action must be in [0, 5)");
    }
}

class PursuitEnv {
public:
    explicit PursuitEnv(PursuitConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    const PursuitConfig& config() const { return cfg_; }
    const PursuitState& state() const { return state_; }
    bool done() const { return done_; }
    int n_agents() const { return cfg_.n_pursuers; }
    static constexpr int kNumActions = 5;

    bool traversable(int x, int y) const {
        return x >= 0 && x < cfg_.grid_w && y >= 0 && y < cfg_.grid_h &&
               state_.obstacle[x * cfg_.grid_h + y] == 0;
    }

    /// Installs an explicit state (replay and scenario construction).
    /// The obstacle mask is rebuilt; entity cells must be traversable and
    /// respect the no-stacking invariants.
    void load_state(PursuitState s, std::uint64_t seed = 0) {
        if (static_cast<int>(s.pursuers.size()) != cfg_.n_pursuers ||
            static_cast<int>(s.evaders.size()) != cfg_.n_evaders ||
            s.alive.size() != s.evaders.size())
            throw ContractError("pursuit load_state: entity counts do not match config");
        rng_ = Rng(seed);
        state_ = std::move(s);
        build_obstacle();
        if (state_.last_move.size() != static_cast<std::size_t>(cfg_.n_pursuers))
            state_.last_move.assign(cfg_.n_pursuers, {0, 0});
        for (const auto& p : state_.pursuers)
            if (!traversable(p.x, p.y)) throw ContractError("pursuit load_state: pursuer on blocked cell");
        for (int e = 0; e < cfg_.n_evaders; ++e)
            if (state_.alive[e] && !traversable(state_.evaders[e].x, state_.evaders[e].y))
                throw ContractError("pursuit load_state: evader on blocked cell");
        int alive_count = 0;
        for (auto a : state_.alive) alive_count += a;
        done_ = (alive_count == 0) || (state_.step >= cfg_.max_cycles);
    }

    std::vector<PursuitObservation> reset(std::uint64_t seed) {
        rng_ = Rng(seed);
        build_obstacle();
        std::vector<GridCell> cells;
        cells.reserve(cfg_.grid_w * cfg_.grid_h);
        for (int x = 0; x < cfg_.grid_w; ++x)
            for (int y = 0; y < cfg_.grid_h; ++y)
                if (state_.obstacle[x * cfg_.grid_h + y] == 0) cells.push_back({x, y});
        const int need = cfg_.n_pursuers + cfg_.n_evaders;
        if (static_cast<int>(cells.size()) < need)
            throw ConfigError("pursuit reset: not enough traversable cells");
        for (int i = 0; i < need; ++i) {
            const std::size_t j = i + rng_.uniform_int(cells.size() - i);
            std::swap(cells[i], cells[j]);
        }
        state_.pursuers.assign(cells.begin(), cells.begin() + cfg_.n_pursuers);
        state_.evaders.assign(cells.begin() + cfg_.n_pursuers, cells.begin() + need);
        state_.alive.assign(cfg_.n_evaders, 1);
        state_.last_move.assign(cfg_.n_pursuers, {0, 0});
        state_.step = 0;
        done_ = false;
        return observe_all(cfg_.obs_range);
    }

    PursuitObservation observe(int agent, int obs_range) const {
        if (agent < 0 || agent >= cfg_.n_pursuers)
            throw ContractError("pursuit observe: bad agent index");
        if (obs_range < 3 || obs_range % 2 == 0)
            throw ContractError("pursuit observe: obs_range must be odd and >= 3");
        PursuitObservation obs;
        obs.range = obs_range;
        const int r = obs_range / 2;
        const int n = obs_range * obs_range;
        obs.wall.assign(n, 0);
        obs.ally.assign(n, 0);
        obs.evader.assign(n, 0);
        obs.last_move = state_.last_move[agent];
        const GridCell me = state_.pursuers[agent];
        for (int dx = -r; dx <= r; ++dx)
            for (int dy = -r; dy <= r; ++dy)
                if (!traversable(me.x + dx, me.y + dy)) obs.wall[obs.index(dx, dy)] = 1;
        for (int j = 0; j < cfg_.n_pursuers; ++j) {
            if (j == agent) continue;
            const int dx = state_.pursuers[j].x - me.x;
            const int dy = state_.pursuers[j].y - me.y;
            if (std::abs(dx) <= r && std::abs(dy) <= r) obs.ally[obs.index(dx, dy)] = 1;
        }
        for (int e = 0; e < cfg_.n_evaders; ++e) {
            if (!state_.alive[e]) continue;
            const int dx = state_.evaders[e].x - me.x;
            const int dy = state_.evaders[e].y - me.y;
            if (std::abs(dx) <= r && std::abs(dy) <= r) obs.evader[obs.index(dx, dy)] = 1;
        }
        return obs;
    }

    PursuitObservation observe(int agent) const { return observe(agent, cfg_.obs_range); }

    StepResult<PursuitObservation> step(const std::vector<int>& actions) {
        return step(actions, cfg_.obs_range);
    }

    /// One cycle: simultaneous pursuer moves (blocked moves stay), random
    /// evader drift, surround captures, tag and urgency rewards.
    StepResult<PursuitObservation> step(const std::vector<int>& actions, int obs_range) {
        if (done_) throw ContractError("pursuit step: episode already terminated");
        const int np = cfg_.n_pursuers;
        if (static_cast<int>(actions.size()) != np)
            throw ContractError("pursuit step: need one action per pursuer");

        StepResult<PursuitObservation> result;
        result.rewards.assign(np, 0.0);

        // Desired targets. A move is blocked (stays) when the target is a
        // wall/obstacle, any pursuer's pre-move cell, or already claimed by a
        // lower-index pursuer this step.
        std::vector<GridCell> desired(np);
        for (int i = 0; i < np; ++i) {
            const GridCell d = pursuit_move_delta(actions[i]);
            GridCell t{state_.pursuers[i].x + d.x, state_.pursuers[i].y + d.y};
            if (!traversable(t.x, t.y)) t = state_.pursuers[i];
            if (!(t == state_.pursuers[i])) {
                for (int j = 0; j < np; ++j)
                    if (j != i && state_.pursuers[j] == t) {
                        t = state_.pursuers[i];
                        break;
                    }
            }
            desired[i] = t;
        }
        std::vector<GridCell> next(np);
        for (int i = 0; i < np; ++i) {
            GridCell t = desired[i];
            if (!(t == state_.pursuers[i])) {
                for (int j = 0; j < i; ++j)
                    if (next[j] == t) {
                        t = state_.pursuers[i];
                        break;
                    }
            }
            next[i] = t;
        }
        for (int i = 0; i < np; ++i) {
            state_.last_move[i] = {next[i].x - state_.pursuers[i].x,
                                   next[i].y - state_.pursuers[i].y};
            state_.pursuers[i] = next[i];
        }

        // Evaders drift one at a time, uniformly over stay plus free cardinal
        // cells (free: traversable, no pursuer, no alive evader).
        for (int e = 0; e < cfg_.n_evaders; ++e) {
            if (!state_.alive[e]) continue;
            const GridCell c = state_.evaders[e];
            GridCell options[5];
            int n_opts = 0;
            options[n_opts++] = c;
            for (int a = 1; a < 5; ++a) {
                const GridCell d = pursuit_move_delta(a);
                const GridCell t{c.x + d.x, c.y + d.y};
                if (!traversable(t.x, t.y)) continue;
                if (occupied_by_pursuer(t) || occupied_by_alive_evader(t, e)) continue;
                options[n_opts++] = t;
            }
            state_.evaders[e] = options[rng_.uniform_int(n_opts)];
        }

        // Surround captures against post-move positions.
        int catches = 0;
        for (int e = 0; e < cfg_.n_evaders; ++e) {
            if (!state_.alive[e]) continue;
            const GridCell c = state_.evaders[e];
            bool surrounded = true;
            bool any_neighbor = false;
            for (int a = 1; a < 5 && surrounded; ++a) {
                const GridCell d = pursuit_move_delta(a);
                const GridCell t{c.x + d.x, c.y + d.y};
                if (!traversable(t.x, t.y)) continue;
                any_neighbor = true;
                if (!occupied_by_pursuer(t)) surrounded = false;
            }
            if (!surrounded || !any_neighbor) continue;
            state_.alive[e] = 0;
            ++catches;
            for (int i = 0; i < np; ++i) {
                const int ddx = std::abs(state_.pursuers[i].x - c.x);
                const int ddy = std::abs(state_.pursuers[i].y - c.y);
                if (ddx + ddy == 1) result.rewards[i] += cfg_.catch_reward;
            }
        }

        int alive_count = 0;
        for (auto a : state_.alive) alive_count += a;
        for (int i = 0; i < np; ++i) {
            const GridCell p = state_.pursuers[i];
            bool tagged = false;
            for (int a = 1; a < 5 && !tagged; ++a) {
                const GridCell d = pursuit_move_delta(a);
                tagged = occupied_by_alive_evader({p.x + d.x, p.y + d.y}, -1);
            }
            if (tagged) result.rewards[i] += cfg_.tag_reward;
            result.rewards[i] += cfg_.urgency_reward;
        }

        state_.step += 1;
        done_ = (alive_count == 0) || (state_.step >= cfg_.max_cycles);
        result.terminated = done_;
        result.info["catches"] = static_cast<double>(catches);
        result.info["alive_evaders"] = static_cast<double>(alive_count);
        result.observations = observe_all(obs_range);
        return result;
    }

private:
    void build_obstacle() {
        state_.obstacle.assign(cfg_.grid_w * cfg_.grid_h, 0);
        const int ox = cfg_.grid_w / 2 - 1;
        const int oy = cfg_.grid_h / 2 - 1;
        for (int dx = 0; dx < 2; ++dx)
            for (int dy = 0; dy < 2; ++dy)
                state_.obstacle[(ox + dx) * cfg_.grid_h + (oy + dy)] = 1;
    }

    bool occupied_by_pursuer(GridCell c) const {
        for (const auto& p : state_.pursuers)
            if (p == c) return true;
        return false;
    }

    bool occupied_by_alive_evader(GridCell c, int except) const {
        for (int e = 0; e < cfg_.n_evaders; ++e)
            if (e != except && state_.alive[e] && state_.evaders[e] == c) return true;
        return false;
    }

    std::vector<PursuitObservation> observe_all(int obs_range) const {
        std::vector<PursuitObservation> obs;
        obs.reserve(cfg_.n_pursuers);
        for (int i = 0; i < cfg_.n_pursuers; ++i) obs.push_back(observe(i, obs_range));
        return obs;
    }

    PursuitConfig cfg_;
    PursuitState state_;
    Rng rng_{0};
    bool done_ = false;
};

}  // namespace taskrl
