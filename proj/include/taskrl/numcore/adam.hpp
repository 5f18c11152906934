#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "taskrl/errors.hpp"
#include "taskrl/numcore/param_store.hpp"

namespace taskrl {

/// Adam optimizer state. Moment buffers are created lazily per parameter
/// path and must match the parameter shape thereafter.
struct AdamState {
    struct Moments {
        Tensor m;
        Tensor v;
    };

    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double lr = 3e-4;
    std::map<std::string, Moments> moments;

    void validate() const {
        if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
            throw ConfigError("AdamState: betas must lie in (0, 1)");
        if (step < 0) throw ConfigError("AdamState: negative step counter");
    }
};

/// One bias-corrected Adam update over every parameter; gradients are
/// zeroed afterwards.
inline void adam_step(ParamStore& store, AdamState& state) {
    state.validate();
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (auto& [path, e] : store) {
        auto [it, created] = state.moments.try_emplace(path);
        if (created) {
            it->second.m = Tensor(e.value.rows(), e.value.cols());
            it->second.v = Tensor(e.value.rows(), e.value.cols());
        }
        Tensor& m = it->second.m;
        Tensor& v = it->second.v;
        if (!m.same_shape(e.value))
            throw DimensionError("adam_step: moment shape " + m.shape_str() + " vs param " +
                                 e.value.shape_str() + " at " + path);
        for (std::size_t i = 0; i < e.value.size(); ++i) {
            const double g = e.grad[i];
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            e.value[i] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
    store.zero_grads();
}

}  // namespace taskrl
