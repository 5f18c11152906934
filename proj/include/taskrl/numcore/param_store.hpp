#pragma once

#include <cmath>
#include <map>
#include <string>

#include "taskrl/errors.hpp"
#include "taskrl/numcore/tensor.hpp"

namespace taskrl {

/// Named parameter tensors with matching gradient buffers.
/// Paths are unique; map iteration order (lexicographic) is the canonical
/// parameter order used by the optimizer and the checkpoint format.
class ParamStore {
public:
    struct Entry {
        Tensor value;
        Tensor grad;
    };

    Entry& add(const std::string& path, Tensor init) {
        if (entries_.count(path)) throw ContractError("ParamStore: duplicate path " + path);
        Entry e;
        e.grad = Tensor(init.rows(), init.cols());
        e.value = std::move(init);
        return entries_.emplace(path, std::move(e)).first->second;
    }

    Entry& at(const std::string& path) {
        auto it = entries_.find(path);
        if (it == entries_.end()) throw ContractError("ParamStore: unknown path " + path);
        return it->second;
    }
    const Entry& at(const std::string& path) const {
        auto it = entries_.find(path);
        if (it == entries_.end()) throw ContractError("ParamStore: unknown path " + path);
        return it->second;
    }

    bool contains(const std::string& path) const { return entries_.count(path) != 0; }
    std::size_t size() const { return entries_.size(); }

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    void zero_grads() {
        for (auto& [path, e] : entries_)
            for (std::size_t i = 0; i < e.grad.size(); ++i) e.grad[i] = 0.0;
    }

    double grad_norm() const {
        double s = 0.0;
        for (const auto& [path, e] : entries_)
            for (std::size_t i = 0; i < e.grad.size(); ++i) s += e.grad[i] * e.grad[i];
        return std::sqrt(s);
    }

    void scale_grads(double f) {
        for (auto& [path, e] : entries_)
            for (std::size_t i = 0; i < e.grad.size(); ++i) e.grad[i] *= f;
    }

    std::size_t num_scalars() const {
        std::size_t n = 0;
        for (const auto& [path, e] : entries_) n += e.value.size();
        return n;
    }

private:
    std::map<std::string, Entry> entries_;
};

}  // namespace taskrl
