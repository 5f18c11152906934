#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "taskrl/errors.hpp"
#include "taskrl/numcore/param_store.hpp"
#include "taskrl/numcore/rng.hpp"
#include "taskrl/numcore/tape.hpp"
#include "taskrl/tasklayer/task.hpp"

namespace taskrl {

/// Shape of the task-scoring network: a shared per-task encoder MLP, two
/// self-attention blocks with residual + layer norm, a per-task scalar head,
/// and a pooled value head.
struct PolicyConfig {
    int d_task = 7;
    int d_model = 64;
    int n_heads = 4;
    std::vector<int> encoder_hidden = {64, 64, 64};
    std::vector<int> head_hidden = {32, 32};

    void validate() const {
        if (d_task < 1) throw ConfigError("policy.d_task must be positive");
        if (n_heads < 1 || d_model % n_heads != 0)
            throw ConfigError("policy.d_model must be divisible by n_heads");
        if (encoder_hidden.empty() || encoder_hidden.back() != d_model)
            throw ConfigError("policy.encoder_hidden must end at d_model");
        if (head_hidden.empty()) throw ConfigError("policy.head_hidden must be non-empty");
    }
};

inline constexpr int kPolicyBlocks = 2;

namespace detail {

inline Tensor xavier(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    Tensor w(fan_in, fan_out);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-limit, limit);
    return w;
}

}  // namespace detail

/// Creates every policy parameter under its canonical path.
inline void init_policy_params(ParamStore& store, const PolicyConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(mix_seed(seed, 0x1217));
    int d_in = cfg.d_task;
    for (std::size_t l = 0; l < cfg.encoder_hidden.size(); ++l) {
        const int d_out = cfg.encoder_hidden[l];
        store.add("enc/w" + std::to_string(l + 1), detail::xavier(d_in, d_out, rng));
        store.add("enc/b" + std::to_string(l + 1), Tensor(1, d_out));
        d_in = d_out;
    }
    for (int b = 0; b < kPolicyBlocks; ++b) {
        const std::string p = "blk" + std::to_string(b) + "/";
        for (const char* name : {"wq", "wk", "wv", "wo"})
            store.add(p + name, detail::xavier(cfg.d_model, cfg.d_model, rng));
        // no key bias: a constant added to every key shifts each score row
        // uniformly, which the row softmax cancels
        for (const char* name : {"bq", "bv", "bo"})
            store.add(p + name, Tensor(1, cfg.d_model));
        store.add(p + "ln_g", Tensor::full(1, cfg.d_model, 1.0));
        store.add(p + "ln_b", Tensor(1, cfg.d_model));
    }
    d_in = cfg.d_model;
    for (std::size_t l = 0; l < cfg.head_hidden.size(); ++l) {
        const int d_out = cfg.head_hidden[l];
        store.add("head/w" + std::to_string(l + 1), detail::xavier(d_in, d_out, rng));
        store.add("head/b" + std::to_string(l + 1), Tensor(1, d_out));
        d_in = d_out;
    }
    store.add("head/w" + std::to_string(cfg.head_hidden.size() + 1),
              detail::xavier(d_in, 1, rng));
    store.add("head/b" + std::to_string(cfg.head_hidden.size() + 1), Tensor(1, 1));

    store.add("value/w1", detail::xavier(cfg.d_model, cfg.head_hidden.front(), rng));
    store.add("value/b1", Tensor(1, cfg.head_hidden.front()));
    store.add("value/w2", detail::xavier(cfg.head_hidden.front(), 1, rng));
    store.add("value/b2", Tensor(1, 1));
}

/// Multi-head self-attention with residual connection and layer norm:
/// y = layer_norm(x + MHA(x)). No positional encoding; the input is a set.
inline NodeRef mha_block(Tape& t, ParamStore& s, const std::string& prefix, NodeRef x,
                         int n_heads) {
    const std::size_t d_model = t.value(x).cols();
    if (d_model % n_heads != 0) throw ConfigError("mha_block: d_model not divisible by heads");
    const std::size_t dk = d_model / n_heads;
    auto q = t.add_rowvec(t.matmul(x, t.param(s, prefix + "wq")), t.param(s, prefix + "bq"));
    auto k = t.matmul(x, t.param(s, prefix + "wk"));
    auto v = t.add_rowvec(t.matmul(x, t.param(s, prefix + "wv")), t.param(s, prefix + "bv"));
    std::vector<NodeRef> heads;
    heads.reserve(n_heads);
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
    for (int h = 0; h < n_heads; ++h) {
        auto qh = t.slice_cols(q, h * dk, (h + 1) * dk);
        auto kh = t.slice_cols(k, h * dk, (h + 1) * dk);
        auto vh = t.slice_cols(v, h * dk, (h + 1) * dk);
        auto attn = t.softmax_rows(t.scale(t.matmul(qh, t.transpose(kh)), inv_sqrt_dk));
        heads.push_back(t.matmul(attn, vh));
    }
    auto concat = n_heads == 1 ? heads[0] : t.concat_cols(heads);
    auto proj = t.add_rowvec(t.matmul(concat, t.param(s, prefix + "wo")),
                             t.param(s, prefix + "bo"));
    return t.layer_norm(t.add(x, proj), t.param(s, prefix + "ln_g"), t.param(s, prefix + "ln_b"));
}

struct PolicyNodes {
    NodeRef scores;  // T x 1 task logits
    NodeRef value;   // 1 x 1 state-value estimate
};

/// Full forward pass over a T x d_task feature matrix node.
inline PolicyNodes policy_forward(Tape& t, ParamStore& s, const PolicyConfig& cfg,
                                  NodeRef feats) {
    if (t.value(feats).cols() != static_cast<std::size_t>(cfg.d_task))
        throw ConfigError("policy_forward: feature length " +
                          std::to_string(t.value(feats).cols()) + " does not match d_task " +
                          std::to_string(cfg.d_task));
    NodeRef x = feats;
    for (std::size_t l = 0; l < cfg.encoder_hidden.size(); ++l) {
        const std::string n = std::to_string(l + 1);
        x = t.relu(t.add_rowvec(t.matmul(x, t.param(s, "enc/w" + n)), t.param(s, "enc/b" + n)));
    }
    for (int b = 0; b < kPolicyBlocks; ++b)
        x = mha_block(t, s, "blk" + std::to_string(b) + "/", x, cfg.n_heads);

    NodeRef h = x;
    for (std::size_t l = 0; l < cfg.head_hidden.size(); ++l) {
        const std::string n = std::to_string(l + 1);
        h = t.relu(t.add_rowvec(t.matmul(h, t.param(s, "head/w" + n)), t.param(s, "head/b" + n)));
    }
    const std::string last = std::to_string(cfg.head_hidden.size() + 1);
    auto scores = t.add_rowvec(t.matmul(h, t.param(s, "head/w" + last)),
                               t.param(s, "head/b" + last));

    auto pooled = t.mean_rows(x);
    auto vh = t.relu(t.add_rowvec(t.matmul(pooled, t.param(s, "value/w1")),
                                  t.param(s, "value/b1")));
    auto value = t.add_rowvec(t.matmul(vh, t.param(s, "value/w2")), t.param(s, "value/b2"));
    return {scores, value};
}

/// Stable log-sum-exp matching the tape op bit for bit, so log-probabilities
/// recomputed at update time reproduce rollout values exactly.
inline double stable_lse(const std::vector<double>& xs) {
    double m = xs[0];
    for (std::size_t j = 1; j < xs.size(); ++j) m = std::max(m, xs[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) s += std::exp(xs[j] - m);
    return m + std::log(s);
}

struct PolicyOutput {
    std::vector<double> scores;
    std::vector<double> probs;
    double value = 0.0;
    int chosen = -1;
    double log_prob = 0.0;
};

/// Scores a task set: logits, softmax probabilities and the value estimate.
inline PolicyOutput score_tasks(ParamStore& s, const PolicyConfig& cfg, const TaskSet& tasks) {
    if (tasks.empty()) throw ContractError("score_tasks: empty task set");
    Tape t;
    auto nodes = policy_forward(t, s, cfg, t.leaf(tasks.to_matrix()));
    const Tensor& sc = t.value(nodes.scores);
    PolicyOutput out;
    out.scores.resize(sc.rows());
    for (std::size_t i = 0; i < sc.rows(); ++i) out.scores[i] = sc(i, 0);
    const double lse = stable_lse(out.scores);
    out.probs.resize(out.scores.size());
    for (std::size_t i = 0; i < out.probs.size(); ++i)
        out.probs[i] = std::exp(out.scores[i] - lse);
    out.value = t.value(nodes.value)[0];
    return out;
}

enum class SelectMode { Sample, Greedy };

/// Fills `chosen` and `log_prob`. Greedy takes the lowest index on ties.
inline void select_task(PolicyOutput& out, SelectMode mode, Rng& rng) {
    if (out.probs.empty()) throw ContractError("select_task: no probabilities");
    if (mode == SelectMode::Greedy) {
        int best = 0;
        for (std::size_t i = 1; i < out.scores.size(); ++i)
            if (out.scores[i] > out.scores[best]) best = static_cast<int>(i);
        out.chosen = best;
    } else {
        out.chosen = rng.categorical(out.probs);
    }
    out.log_prob = out.scores[out.chosen] - stable_lse(out.scores);
}

struct LossNodes {
    NodeRef logp;     // log-probability of the chosen task
    NodeRef entropy;  // entropy of the categorical task distribution
};

/// Builds log-prob and entropy nodes from a T x 1 score column.
/// H = lse - sum(p * s) keeps the whole computation on the tape.
inline LossNodes logp_entropy(Tape& t, NodeRef scores, int chosen) {
    auto row = t.transpose(scores);  // 1 x T
    auto lse = t.logsumexp_row(row);
    auto logp = t.sub(t.pick(scores, chosen, 0), lse);
    auto probs = t.softmax_rows(row);
    auto entropy = t.sub(lse, t.sum_all(t.mul(probs, row)));
    return {logp, entropy};
}

}  // namespace taskrl
