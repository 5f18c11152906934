#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "taskrl/attnpolicy/actor.hpp"
#include "taskrl/attnpolicy/policy.hpp"
#include "taskrl/numcore/gradcheck.hpp"

using namespace taskrl;

namespace {

TaskSet random_taskset(int n, int d, Rng& rng) {
    TaskSet set;
    for (int i = 0; i < n; ++i) {
        Task t;
        t.kind = TaskKind::GoLandmark;
        t.features.resize(d);
        for (auto& f : t.features) f = rng.uniform(-1.0, 1.0);
        set.tasks.push_back(std::move(t));
    }
    return set;
}

PolicyConfig small_config(int d_task = 7) {
    PolicyConfig cfg;
    cfg.d_task = d_task;
    return cfg;
}

}  // namespace

TEST_CASE("encoder contract", "[attnpolicy]") {
    PolicyConfig cfg = small_config();
    ParamStore store;
    init_policy_params(store, cfg, 1);
    Rng rng(2);

    SECTION("handles T=1 and T=29 without reconfiguration") {
        for (int n : {1, 29, 64}) {
            auto out = score_tasks(store, cfg, random_taskset(n, 7, rng));
            REQUIRE(out.scores.size() == static_cast<std::size_t>(n));
            double s = std::accumulate(out.probs.begin(), out.probs.end(), 0.0);
            REQUIRE_THAT(s, Catch::Matchers::WithinAbs(1.0, 1e-12));
        }
    }
    SECTION("identical tasks embed identically and score uniformly") {
        TaskSet set = random_taskset(1, 7, rng);
        for (int i = 0; i < 5; ++i) set.tasks.push_back(set.tasks[0]);
        auto out = score_tasks(store, cfg, set);
        for (double p : out.probs)
            REQUIRE_THAT(p, Catch::Matchers::WithinAbs(1.0 / 6.0, 1e-9));
    }
    SECTION("feature-length mismatch is a configuration error") {
        REQUIRE_THROWS_AS(score_tasks(store, cfg, random_taskset(3, 8, rng)), ConfigError);
    }
    SECTION("empty task set is a contract error") {
        TaskSet empty;
        REQUIRE_THROWS_AS(score_tasks(store, cfg, empty), ContractError);
    }
}

TEST_CASE("single-token attention collapses to the value projection", "[attnpolicy]") {
    PolicyConfig cfg = small_config();
    ParamStore store;
    init_policy_params(store, cfg, 3);
    Rng rng(4);
    Tensor x(1, 64);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);

    Tape t;
    auto y = mha_block(t, store, "blk0/", t.leaf(x), cfg.n_heads);

    // with one token the attention weights are 1, so MHA(x) = (x Wv + bv) Wo + bo
    const Tensor& wv = store.at("blk0/wv").value;
    const Tensor& bv = store.at("blk0/bv").value;
    const Tensor& wo = store.at("blk0/wo").value;
    const Tensor& bo = store.at("blk0/bo").value;
    Tensor v(1, 64), o(1, 64);
    for (int j = 0; j < 64; ++j) {
        double s = bv[j];
        for (int k = 0; k < 64; ++k) s += x[k] * wv(k, j);
        v[j] = s;
    }
    for (int j = 0; j < 64; ++j) {
        double s = bo[j];
        for (int k = 0; k < 64; ++k) s += v[k] * wo(k, j);
        o[j] = s;
    }
    // reproduce the residual + layer norm on top
    double mean = 0.0;
    Tensor pre(1, 64);
    for (int j = 0; j < 64; ++j) {
        pre[j] = x[j] + o[j];
        mean += pre[j];
    }
    mean /= 64.0;
    double var = 0.0;
    for (int j = 0; j < 64; ++j) var += (pre[j] - mean) * (pre[j] - mean);
    var /= 64.0;
    const double inv = 1.0 / std::sqrt(var + 1e-5);
    for (int j = 0; j < 64; ++j) {
        const double expected = (pre[j] - mean) * inv;  // gain 1, bias 0 at init
        REQUIRE_THAT(t.value(y)[j], Catch::Matchers::WithinAbs(expected, 1e-10));
    }
}

TEST_CASE("attention matches an independent oracle on hand-set weights", "[attnpolicy]") {
    // T=2, d=4, one head; oracle coded with plain loops
    PolicyConfig cfg;
    cfg.d_task = 4;
    cfg.d_model = 4;
    cfg.n_heads = 1;
    cfg.encoder_hidden = {4};
    cfg.head_hidden = {3};
    ParamStore store;
    init_policy_params(store, cfg, 9);

    Rng rng(10);
    Tensor x(2, 4);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);

    Tape t;
    auto q = t.add_rowvec(t.matmul(t.leaf(x), t.param(store, "blk0/wq")),
                          t.param(store, "blk0/bq"));
    auto k = t.add_rowvec(t.matmul(t.leaf(x), t.param(store, "blk0/wk")),
                          t.param(store, "blk0/bk"));
    auto v = t.add_rowvec(t.matmul(t.leaf(x), t.param(store, "blk0/wv")),
                          t.param(store, "blk0/bv"));
    auto attn = t.softmax_rows(t.scale(t.matmul(q, t.transpose(k)), 0.5));
    auto out = t.matmul(attn, v);

    // oracle: dense scaled dot-product attention
    auto proj = [&](const char* w, const char* b) {
        Tensor r(2, 4);
        const Tensor& W = store.at(w).value;
        const Tensor& B = store.at(b).value;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = B[j];
                for (int kk = 0; kk < 4; ++kk) s += x(i, kk) * W(kk, j);
                r(i, j) = s;
            }
        return r;
    };
    Tensor Q = proj("blk0/wq", "blk0/bq");
    Tensor K = proj("blk0/wk", "blk0/bk");
    Tensor V = proj("blk0/wv", "blk0/bv");
    for (int i = 0; i < 2; ++i) {
        double logits[2];
        for (int j = 0; j < 2; ++j) {
            double s = 0.0;
            for (int kk = 0; kk < 4; ++kk) s += Q(i, kk) * K(j, kk);
            logits[j] = s / 2.0;  // sqrt(d_k) = 2
        }
        const double m = std::max(logits[0], logits[1]);
        double w0 = std::exp(logits[0] - m), w1 = std::exp(logits[1] - m);
        const double z = w0 + w1;
        w0 /= z;
        w1 /= z;
        for (int j = 0; j < 4; ++j) {
            const double expected = w0 * V(0, j) + w1 * V(1, j);
            REQUIRE_THAT(t.value(out)(i, j), Catch::Matchers::WithinAbs(expected, 1e-10));
        }
    }
}

TEST_CASE("permutation equivariance of scores, invariance of value", "[attnpolicy]") {
    PolicyConfig cfg = small_config();
    ParamStore store;
    init_policy_params(store, cfg, 5);
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_int(32));
        TaskSet set = random_taskset(n, 7, rng);
        auto base = score_tasks(store, cfg, set);

        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
        TaskSet permuted;
        for (int i = 0; i < n; ++i) permuted.tasks.push_back(set.tasks[perm[i]]);
        auto shuffled = score_tasks(store, cfg, permuted);

        for (int i = 0; i < n; ++i)
            REQUIRE_THAT(shuffled.scores[i],
                         Catch::Matchers::WithinAbs(base.scores[perm[i]], 1e-9));
        REQUIRE_THAT(shuffled.value, Catch::Matchers::WithinAbs(base.value, 1e-9));
    }
}

TEST_CASE("full-policy gradients match finite differences", "[attnpolicy][gradcheck]") {
    PolicyConfig cfg = small_config();
    ParamStore store;
    init_policy_params(store, cfg, 7);
    Rng rng(8);
    TaskSet set = random_taskset(3, 7, rng);
    const Tensor feats = set.to_matrix();

    // loss exercises scores, softmax/entropy and the value head together
    auto forward = [&](Tape& t, ParamStore& s) {
        auto nodes = policy_forward(t, s, cfg, t.leaf(feats));
        auto ln = logp_entropy(t, nodes.scores, 1);
        auto mean_score = t.mean_all(nodes.scores);
        return t.add(t.add(mean_score, nodes.value), t.add(ln.entropy, ln.logp));
    };
    auto report = grad_check(store, forward);
    CAPTURE(report.worst_path, report.worst_index);
    REQUIRE(report.max_rel_err <= 1e-4);
}

TEST_CASE("task selection", "[attnpolicy]") {
    Rng rng(11);
    SECTION("degenerate distribution picks index 0 in both modes") {
        PolicyOutput out;
        out.scores = {10.0, -40.0, -40.0};
        out.probs = {1.0, 0.0, 0.0};
        select_task(out, SelectMode::Greedy, rng);
        REQUIRE(out.chosen == 0);
        select_task(out, SelectMode::Sample, rng);
        REQUIRE(out.chosen == 0);
        REQUIRE_THAT(out.log_prob, Catch::Matchers::WithinAbs(std::log(out.probs[0]), 1e-12));
    }
    SECTION("greedy takes the lowest index on exact ties") {
        PolicyOutput out;
        out.scores = {1.0, 2.0, 2.0};
        out.probs = {0.2, 0.4, 0.4};
        select_task(out, SelectMode::Greedy, rng);
        REQUIRE(out.chosen == 1);
    }
    SECTION("sampling frequencies track probabilities") {
        PolicyOutput out;
        out.scores = {std::log(0.25), std::log(0.75)};
        out.probs = {0.25, 0.75};
        int count1 = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            select_task(out, SelectMode::Sample, rng);
            count1 += out.chosen;
        }
        REQUIRE_THAT(count1 / static_cast<double>(n), Catch::Matchers::WithinAbs(0.75, 0.01));
    }
    SECTION("log_prob is consistent with probs on every forward pass") {
        PolicyConfig cfg = small_config();
        ParamStore store;
        init_policy_params(store, cfg, 21);
        for (int i = 0; i < 20; ++i) {
            auto set = random_taskset(1 + static_cast<int>(rng.uniform_int(12)), 7, rng);
            auto out = score_tasks(store, cfg, set);
            select_task(out, SelectMode::Sample, rng);
            REQUIRE_THAT(out.log_prob,
                         Catch::Matchers::WithinAbs(std::log(out.probs[out.chosen]), 1e-12));
        }
    }
}

TEST_CASE("act composes generator, policy and converter", "[attnpolicy]") {
    SECTION("a dominant go-landmark score emits the converter's action") {
        PolicyConfig cfg = small_config();
        ParamStore store;
        init_policy_params(store, cfg, 31);
        SpreadObservation obs;
        obs.pos = {0.0, 0.0};
        obs.vel = {0.0, 0.0};
        obs.landmark_rel = {{0.9, 0.0}, {0.0, -0.8}, {-0.7, 0.1}};
        obs.ally_rel = {{0.3, 0.3}, {-0.2, 0.4}};
        auto tasks = gen_tasks_spread(obs);
        auto out = score_tasks(store, cfg, tasks);
        // force near-degenerate probabilities toward some go-landmark task
        // by scoring with greedy selection on a fixed store; emulate the
        // dominance case directly instead:
        out.probs.assign(tasks.size(), 0.0);
        out.scores.assign(tasks.size(), -60.0);
        out.probs[1] = 1.0;
        out.scores[1] = 60.0;
        Rng rng(1);
        select_task(out, SelectMode::Sample, rng);
        REQUIRE(out.chosen == 1);
        REQUIRE(convert_spread(tasks[1], obs) ==
                convert_spread_go_landmark(tasks[1], obs));
    }
    SECTION("same parameters, seed and observation give identical results") {
        PolicyConfig cfg = small_config();
        ParamStore store;
        init_policy_params(store, cfg, 32);
        SpreadEnv env{SpreadConfig{}};
        auto obs = env.reset(12);
        Rng r1(77), r2(77);
        auto a = act_spread(obs[0], store, cfg, SelectMode::Sample, r1);
        auto b = act_spread(obs[0], store, cfg, SelectMode::Sample, r2);
        REQUIRE(a.action == b.action);
        REQUIRE(a.chosen == b.chosen);
        REQUIRE(a.log_prob == b.log_prob);
        REQUIRE(a.value == b.value);
    }
    SECTION("one pursuit parameter set serves 5x5 and 9x9 windows") {
        PolicyConfig cfg = small_config(kPursuitFeatureLen);
        ParamStore store;
        init_policy_params(store, cfg, 33);
        PursuitEnv env{PursuitConfig{}};
        env.reset(3);
        Rng rng(5);
        for (int range : {5, 9}) {
            auto obs = env.observe(0, range);
            auto r = act_pursuit(obs, store, cfg, SelectMode::Greedy, rng);
            REQUIRE(r.action >= 0);
            REQUIRE(r.action < 5);
        }
    }
}
