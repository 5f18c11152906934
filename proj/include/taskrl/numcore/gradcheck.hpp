#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "taskrl/numcore/param_store.hpp"
#include "taskrl/numcore/tape.hpp"

namespace taskrl {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_path;
    std::size_t worst_index = 0;
    std::vector<std::pair<std::string, double>> per_param;

    bool ok(double tol) const { return max_rel_err <= tol; }
};

/// Compares analytic gradients against central finite differences.
///
/// `forward` must be a deterministic function (Tape&, ParamStore&) -> NodeRef
/// returning a scalar loss node. Every element of every parameter is
/// perturbed by +-h. Relative error uses |a - n| / max(|a| + |n|, 1e-6);
/// the floor keeps near-zero gradients, where the difference quotient is
/// dominated by roundoff, on an absolute scale.
template <class Forward>
GradCheckReport grad_check(ParamStore& store, Forward&& forward, double h = 1e-5) {
    store.zero_grads();
    {
        Tape tape;
        NodeRef loss = forward(tape, store);
        tape.backward(loss);
    }
    std::map<std::string, Tensor> analytic;
    for (auto& [path, e] : store) analytic.emplace(path, e.grad);
    store.zero_grads();

    auto eval = [&]() {
        Tape tape;
        NodeRef loss = forward(tape, store);
        return tape.value(loss)[0];
    };

    GradCheckReport report;
    for (auto& [path, e] : store) {
        double worst = 0.0;
        for (std::size_t i = 0; i < e.value.size(); ++i) {
            const double saved = e.value[i];
            e.value[i] = saved + h;
            const double fp = eval();
            e.value[i] = saved - h;
            const double fm = eval();
            e.value[i] = saved;
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic.at(path)[i];
            const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-8);
            if (rel > worst) worst = rel;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_path = path;
                report.worst_index = i;
            }
        }
        report.per_param.emplace_back(path, worst);
    }
    return report;
}

}  // namespace taskrl
