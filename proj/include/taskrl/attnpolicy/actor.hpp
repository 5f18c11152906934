#pragma once

#include "taskrl/attnpolicy/policy.hpp"
#include "taskrl/tasklayer/convert.hpp"
#include "taskrl/tasklayer/generate.hpp"

namespace taskrl {

/// Everything the trainer needs from one agent decision.
struct ActResult {
    int action = 0;
    int chosen = -1;
    double log_prob = 0.0;
    double value = 0.0;
    TaskSet tasks;
};

/// Observation -> tasks -> attention scoring -> selection -> converter.
inline ActResult act_spread(const SpreadObservation& obs, ParamStore& params,
                            const PolicyConfig& cfg, SelectMode mode, Rng& rng,
                            const ConverterParams& cp = {}) {
    ActResult r;
    r.tasks = gen_tasks_spread(obs);
    PolicyOutput out = score_tasks(params, cfg, r.tasks);
    select_task(out, mode, rng);
    r.chosen = out.chosen;
    r.log_prob = out.log_prob;
    r.value = out.value;
    r.action = convert_spread(r.tasks[r.chosen], obs, cp);
    return r;
}

inline ActResult act_pursuit(const PursuitObservation& obs, ParamStore& params,
                             const PolicyConfig& cfg, SelectMode mode, Rng& rng,
                             const ConverterParams& cp = {}) {
    ActResult r;
    r.tasks = gen_tasks_pursuit(obs);
    PolicyOutput out = score_tasks(params, cfg, r.tasks);
    select_task(out, mode, rng);
    r.chosen = out.chosen;
    r.log_prob = out.log_prob;
    r.value = out.value;
    r.action = convert_pursuit(r.tasks[r.chosen], obs, cp);
    return r;
}

}  // namespace taskrl
