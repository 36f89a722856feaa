// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Every tolerance used below is a named
// constant in this file; none of them is read from the environment.

#include "safenet/cli.hpp"
#include "safenet/data_pipeline.hpp"
#include "safenet/harness.hpp"
#include "safenet/metrics.hpp"
#include "safenet/optim.hpp"
#include "safenet/random.hpp"
#include "safenet/synthetic.hpp"

#include "gradcheck.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace safenet;
namespace fs = std::filesystem;

namespace {

constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kPreNormBiasTol = 1e-12;  // exact gradient is zero
constexpr double kSegmentTol = 1e-9;
constexpr double kOptimizerTol = 1e-12;
constexpr double kDecayUlps = 4.0;
constexpr double kMetricTol = 1e-12;
constexpr double kFindingAMinEp = 0.5;
constexpr double kFindingAExpectedMeanEp = 0.6;
constexpr double kFindingBMaxEp = 0.55;
constexpr double kScrambledPretrainBand = 10.0;  // percentage points around 50
constexpr double kOverlapRejectSeconds = 5.0;

// Outcome of one criterion: pass flag plus a short human-readable detail.
struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Balanced sizes, test sizes and train-pool sizes of the seven surveyed
//    companies, pushed through the real SMOTE and split code.

Verdict survey_bookkeeping() {
    struct Row {
        Index n, minority, balanced, test, pool;
    };
    const Row rows[] = {{1831, 742, 2178, 200, 1978}, {432, 209, 446, 178, 268},
                        {257, 27, 460, 184, 276},     {244, 46, 396, 158, 238},
                        {218, 58, 320, 128, 192},     {3493, 780, 5426, 200, 5226},
                        {406, 112, 588, 200, 388}};
    Verdict v;
    for (std::size_t i = 0; i < std::size(rows); ++i) {
        const auto& r = rows[i];
        const auto raw = testing::random_dataset(r.n, r.minority, 4, 100 + i);
        const auto balanced = smote_balance(raw, kDefaultSmoteNeighbors, i);
        const auto split = split_company(balanced, 7 * i + 1);
        const auto where = fmt("company %zu", i + 1);
        v.require(balanced_size(r.n, r.minority) == r.balanced, where + " balanced_size");
        v.require(balanced.rows() == r.balanced, where + " balanced rows");
        v.require(test_size_for(r.balanced) == r.test, where + " test_size_for");
        v.require(split.test_set.rows() == r.test, where + " test rows");
        v.require(split.train_pool.rows() == r.pool, where + " pool rows");
    }
    if (v.pass) v.detail = "7 companies exact";
    return v;
}

// ---------------------------------------------------------------------------
// 2. Analytic gradients against central differences.

Verdict gradients() {
    Verdict v;
    double worst = 0.0, bias = 0.0;
    std::string worst_name;
    int checked = 0;
    std::mt19937_64 rng(2024);
    for (int draw = 0; draw < 20; ++draw) {
        const auto scheme = draw % 2 ? InitScheme::scaled : InitScheme::paper;
        auto params = init_params(derive_seed(31, "grad", draw), scheme);
        const Index batch = 4 + draw % 13;
        std::normal_distribution<double> normal;
        Eigen::MatrixXd x(batch, kSurveyItems);
        for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
        std::vector<int> y(static_cast<std::size_t>(batch));
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>((rng() >> 7) & 1);
        y[0] = 0;
        y[1] = 1;
        const auto r = testing::check_gradients(params, x, y, derive_seed(5, "probe", draw), 24, 2, kGradStep);
        checked += r.checked;
        bias = std::max(bias, r.pre_norm_bias_grad);
        if (r.max_rel_error > worst) {
            worst = r.max_rel_error;
            worst_name = r.worst_tensor;
        }
    }
    v.require(worst < kGradRelTol, "relative error in " + worst_name);
    v.require(bias < kPreNormBiasTol, "pre-norm bias gradient not zero");
    v.detail = fmt("%d probes, max rel %.2e (%s), pre-norm bias |g| %.1e", checked, worst,
                   worst_name.c_str(), bias) +
               (v.pass ? "" : " -- " + v.detail);
    return v;
}

// ---------------------------------------------------------------------------
// 3. SMOTE geometry.

// Smallest componentwise distance from `s` to any segment between two
// minority rows, found by brute force over all pairs.
double distance_to_segments(const Eigen::RowVectorXd& s, const std::vector<Eigen::RowVectorXd>& minority) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < minority.size(); ++a)
        for (std::size_t b = 0; b < minority.size(); ++b) {
            if (a == b) continue;
            const Eigen::RowVectorXd d = minority[b] - minority[a];
            const double dd = d.squaredNorm();
            double t = dd > 0 ? (s - minority[a]).dot(d) / dd : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            best = std::min(best, (s - (minority[a] + t * d)).cwiseAbs().maxCoeff());
        }
    return best;
}

Verdict smote_geometry() {
    Verdict v;
    std::mt19937_64 rng(77);
    double worst = 0.0;
    int synthetic = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 12 + static_cast<Index>(rng() % 60);
        const Index m = 2 + static_cast<Index>(rng() % static_cast<std::uint64_t>(n / 2 - 1));
        const Index dim = 1 + static_cast<Index>(rng() % 8);
        auto d = testing::random_dataset(n, m, dim, rng());
        if (trial % 2)  // minority class 0 half of the time
            for (auto& y : d.labels) y = 1 - y;
        const int k = 1 + static_cast<int>(rng() % 6);
        const auto out = smote_balance(d, k, rng());
        const auto where = fmt("trial %d", trial);

        v.require(out.count(0) == out.count(1), where + ": unequal classes");
        v.require(out.rows() >= d.rows(), where + ": rows lost");
        if (!v.pass) break;
        v.require(out.features.topRows(d.rows()) == d.features, where + ": originals changed");
        v.require(std::equal(d.labels.begin(), d.labels.end(), out.labels.begin()), where + ": labels changed");

        const int minority_label = d.count(1) < d.count(0) ? 1 : 0;
        std::vector<Eigen::RowVectorXd> pts;
        for (Index i = 0; i < d.rows(); ++i)
            if (d.labels[static_cast<std::size_t>(i)] == minority_label) pts.push_back(d.features.row(i));
        for (Index i = d.rows(); i < out.rows(); ++i) {
            v.require(out.labels[static_cast<std::size_t>(i)] == minority_label, where + ": synthetic label");
            const double dist = distance_to_segments(out.features.row(i), pts);
            worst = std::max(worst, dist);
            ++synthetic;
        }
    }
    v.require(worst <= kSegmentTol, "synthetic row off every segment");
    v.detail = fmt("100 datasets, %d synthetic rows, max off-segment %.1e", synthetic, worst) +
               (v.pass ? "" : " -- " + v.detail);
    return v;
}

// ---------------------------------------------------------------------------
// 4. AdamW and the step schedule.

struct ScalarAdamW {
    double theta, m = 0, v = 0;
    int t = 0;
    void step(double g, double lr, const OptimizerConfig& c, bool decay) {
        ++t;
        m = c.beta1 * m + (1 - c.beta1) * g;
        v = c.beta2 * v + (1 - c.beta2) * g * g;
        const double mh = m / (1 - std::pow(c.beta1, t));
        const double vh = v / (1 - std::pow(c.beta2, t));
        theta = theta - lr * mh / (std::sqrt(vh) + c.eps) - (decay ? lr * c.weight_decay * theta : 0.0);
    }
};

Verdict optimizer() {
    Verdict v;
    std::mt19937_64 rng(404);
    OptimizerConfig cfg;
    cfg.weight_decay = 0.02;
    auto p = init_params(8);
    auto state = OptimizerState::zeros_like(p);

    // one scalar oracle per element of every tensor; batch-norm affine
    // parameters are the only ones exempt from decay
    std::vector<std::vector<ScalarAdamW>> oracle;
    std::vector<bool> decays;
    for (auto& t : trainable_tensors(p)) {
        oracle.emplace_back();
        for (double x : t.data) oracle.back().push_back({x});
        decays.push_back(!t.name.starts_with("bn"));
    }
    double worst = 0.0;
    std::uniform_real_distribution<double> lr_dist(1e-5, 1e-2), scale_dist(1e-3, 10.0);
    for (int step = 0; step < 100; ++step) {
        auto g = Gradients::zeros_like(p);
        std::normal_distribution<double> normal(0.0, scale_dist(rng));
        for (auto& t : gradient_tensors(g))
            for (auto& x : t.data) x = normal(rng);
        const double lr = lr_dist(rng);
        adamw_step(p, g, state, lr, cfg);
        auto gt = gradient_tensors(g);
        auto pt = trainable_tensors(p);
        for (std::size_t t = 0; t < pt.size(); ++t)
            for (std::size_t i = 0; i < pt[t].data.size(); ++i) {
                auto& o = oracle[t][i];
                o.step(gt[t].data[i], lr, cfg, decays[t]);
                worst = std::max(worst, std::abs(pt[t].data[i] - o.theta));
            }
    }
    v.require(worst <= kOptimizerTol, "adamw diverges from the scalar oracle");

    // Decay displacement against a twin run without decay, over many steps
    // so that both states see identical gradients and moments.
    double decay_ulps = 0.0;
    {
        OptimizerConfig with;
        OptimizerConfig without = with;
        without.weight_decay = 0.0;
        auto a = init_params(9);
        auto sa = OptimizerState::zeros_like(a);
        for (int step = 0; step < 100; ++step) {
            auto g = Gradients::zeros_like(a);
            std::normal_distribution<double> normal(0.0, 1.0);
            for (auto& t : gradient_tensors(g))
                for (auto& x : t.data) x = normal(rng);
            auto b = a;
            auto sb = sa;
            const double lr = lr_dist(rng);
            const auto before = a;
            adamw_step(a, g, sa, lr, with);
            adamw_step(b, g, sb, lr, without);
            auto ta = trainable_tensors(a);
            auto tb = trainable_tensors(b);
            auto t0 = trainable_tensors(const_cast<ModelParams&>(before));
            for (std::size_t t = 0; t < ta.size(); ++t)
                for (std::size_t i = 0; i < ta[t].data.size(); ++i) {
                    const double theta = t0[t].data[i];
                    const double expected = decays[t] ? -lr * with.weight_decay * theta : 0.0;
                    const double got = ta[t].data[i] - tb[t].data[i];
                    // each run rounds its own sum, so the unit is an ulp of the largest value involved
                    const double scale = std::max({std::abs(theta), std::abs(ta[t].data[i]), std::abs(tb[t].data[i])});
                    const double ulp = std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
                    decay_ulps = std::max(decay_ulps, std::abs(got - expected) / ulp);
                }
        }
    }
    v.require(decay_ulps <= kDecayUlps, "decay displacement is not -lr*wd*theta");

    bool schedule = true;
    const OptimizerConfig base;
    for (int e = 0; e <= 120; ++e)
        schedule = schedule && scheduled_lr(e, base) == base.base_lr * std::pow(0.1, e / 30);
    v.require(schedule, "scheduled_lr differs from base*0.1^floor(e/30)");

    v.detail = fmt("max |theta - oracle| %.1e over 100 steps, decay within %.1f ulp, schedule exact", worst,
                   decay_ulps) +
               (v.pass ? "" : " -- " + v.detail);
    return v;
}

// ---------------------------------------------------------------------------
// 5. Transfer score against a brute-force reimplementation.

Verdict metric_oracle() {
    Verdict v;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> acc(0.5, 100.0);
    double worst = 0.0;
    bool ep_in_range = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 200;
        std::vector<PairedAccuracy> pairs(n);
        for (std::size_t i = 0; i < n; ++i) {
            pairs[i] = {static_cast<int>(1 + i / 5), acc(rng), acc(rng), static_cast<int>(i % 5)};
            if (rng() % 6 == 0) pairs[i].a_pt = pairs[i].a_st;
            if (rng() % 50 == 0) pairs[i].a_pt = pairs[i].a_st = 50.0;
        }
        int better = 0;
        long double gap = 0, rel = 0;
        for (const auto& p : pairs) {
            if (p.a_pt > p.a_st) ++better;
            gap += p.a_pt - p.a_st;
            rel += (p.a_pt - p.a_st) / p.a_st;
        }
        const double ep = static_cast<double>(better) / static_cast<double>(n);
        const double me = static_cast<double>(gap / n);
        const double nme = static_cast<double>(100 * rel / n);
        const auto s = transfer_score(pairs);
        ep_in_range = ep_in_range && s.ep >= 0.0 && s.ep <= 1.0;
        worst = std::max({worst, std::abs(s.ep - ep), std::abs(s.me - me), std::abs(s.nme - nme)});
    }
    v.require(worst <= kMetricTol, "transfer_score disagrees with brute force");
    v.require(ep_in_range, "EP outside [0, 1]");
    v.detail = fmt("1000 lists, max deviation %.1e", worst) + (v.pass ? "" : " -- " + v.detail);
    return v;
}

// ---------------------------------------------------------------------------
// 6 and 7. Two companies sharing their generating weights.

constexpr int kHarnessSeeds[] = {1, 2, 3};
constexpr double kTwoCompanyNoise = 0.25;

SweepResult two_company_sweep(std::uint64_t seed, bool scramble) {
    GeneratorSpec spec;
    spec.shared_weights_seed = derive_seed(seed, "weights");
    spec.companies = {{.company_id = 1, .n_rows = 400, .minority_fraction = 0.3, .noise_level = kTwoCompanyNoise},
                      {.company_id = 2, .n_rows = 400, .minority_fraction = 0.3, .noise_level = kTwoCompanyNoise}};
    const auto table = testing::synthetic_table(spec, derive_seed(seed, "generate"));
    ExperimentConfig cfg;
    cfg.source_company_ids = {1};
    cfg.target_company_id = 2;
    cfg.sweep = {.start = 1, .stop = 40, .step = 1};
    cfg.repeats_per_point = 5;
    cfg.scramble_source_labels = scramble;
    cfg.seed = derive_seed(seed, "experiment");
    return run_experiment(cfg, table, 1);
}

Verdict finding_transfer_helps() {
    Verdict v;
    std::string detail;
    double total = 0;
    for (int seed : kHarnessSeeds) {
        const auto r = two_company_sweep(static_cast<std::uint64_t>(seed), false);
        v.require(r.pairs.size() == 200, "sweep size");
        v.require(r.score.ep > kFindingAMinEp, fmt("seed %d: EP %.3f", seed, r.score.ep));
        v.require(r.score.me > 0.0, fmt("seed %d: ME %.2f", seed, r.score.me));
        total += r.score.ep;
        detail += fmt("seed %d EP %.3f ME %+.2f (pretrain %.1f%%); ", seed, r.score.ep, r.score.me,
                      r.pretrain_accuracy);
    }
    const double mean = total / std::size(kHarnessSeeds);
    v.require(mean >= kFindingAExpectedMeanEp, fmt("mean EP %.3f", mean));
    v.detail = detail + fmt("mean EP %.3f", mean) + (v.pass ? "" : " -- " + v.detail);
    return v;
}

Verdict finding_bad_pretraining() {
    // A model pretrained on scrambled labels is a random function of the
    // survey answers, so a single seed can land on either side of the
    // from-scratch baseline. The bound applies to all seeds' pairs pooled.
    Verdict v;
    std::string detail;
    std::vector<PairedAccuracy> pooled;
    for (int seed : kHarnessSeeds) {
        const auto r = two_company_sweep(static_cast<std::uint64_t>(seed), true);
        v.require(std::abs(r.pretrain_accuracy - 50.0) <= kScrambledPretrainBand,
                  fmt("seed %d: pretrain accuracy %.1f", seed, r.pretrain_accuracy));
        pooled.insert(pooled.end(), r.pairs.begin(), r.pairs.end());
        detail += fmt("seed %d EP %.3f ME %+.2f (pretrain %.1f%%); ", seed, r.score.ep, r.score.me,
                      r.pretrain_accuracy);
    }
    const auto all = transfer_score(pooled);
    v.require(all.ep <= kFindingBMaxEp, fmt("pooled EP %.3f", all.ep));
    v.detail = detail + fmt("pooled EP %.3f ME %+.2f", all.ep, all.me) + (v.pass ? "" : " -- " + v.detail);
    return v;
}

// ---------------------------------------------------------------------------
// 8. More source companies, no worse transfer.

Verdict finding_more_sources() {
    GeneratorSpec spec;
    spec.shared_weights_seed = 808;
    for (int id = 1; id <= 5; ++id)
        spec.companies.push_back({.company_id = id,
                                  .n_rows = 300,
                                  .minority_fraction = 0.3,
                                  .weight_perturbation = 0.5,
                                  .noise_level = kTwoCompanyNoise});
    const auto table = testing::synthetic_table(spec, 9);
    const int target = 5;

    // every non-empty subset of {1, 2, 3, 4}, grouped by size
    std::vector<std::vector<double>> gaps(5);
    for (unsigned mask = 1; mask < 16; ++mask) {
        ExperimentConfig cfg;
        for (int id = 1; id <= 4; ++id)
            if (mask & (1u << (id - 1))) cfg.source_company_ids.push_back(id);
        cfg.target_company_id = target;
        cfg.sweep.points = {1, 2, 4, 8, 16, 32};
        cfg.repeats_per_point = 4;
        cfg.seed = 4242;  // shared: every source set sees the same target draws
        const auto r = run_experiment(cfg, table, 1);
        for (const auto& p : r.pairs) gaps[cfg.source_company_ids.size()].push_back(p.a_pt - p.a_st);
    }

    Verdict v;
    std::vector<double> mean(5), se(5);
    for (std::size_t k = 1; k <= 4; ++k) {
        const auto& g = gaps[k];
        const double n = static_cast<double>(g.size());
        mean[k] = std::accumulate(g.begin(), g.end(), 0.0) / n;
        double ss = 0;
        for (double x : g) ss += (x - mean[k]) * (x - mean[k]);
        se[k] = std::sqrt(ss / (n - 1)) / std::sqrt(n);
        v.detail += fmt("k=%zu DA %+.2f (se %.2f); ", k, mean[k], se[k]);
    }
    for (std::size_t k = 1; k < 4; ++k) {
        const double pooled = std::sqrt(se[k] * se[k] + se[k + 1] * se[k + 1]);
        v.require(mean[k + 1] >= mean[k] - pooled, fmt("drop from %zu to %zu sources", k, k + 1));
    }
    return v;
}

// ---------------------------------------------------------------------------
// 9. CLI runs repeat bit for bit.

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "safenet");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Verdict cli_determinism() {
    const auto dir = testing::scratch_dir("acceptance_cli");
    const auto config = dir / "config.json";
    std::ofstream(config) << R"({
  "data": {"generator": {"companies": [
    {"id": 1, "n_rows": 200, "minority_fraction": 0.3, "noise_level": 0.3, "missing_rate": 0.02},
    {"id": 2, "n_rows": 200, "minority_fraction": 0.3, "noise_level": 0.3, "weight_perturbation": 0.3},
    {"id": 3, "n_rows": 160, "minority_fraction": 0.2, "noise_level": 0.3}]}},
  "pretrain": {"epochs": 6},
  "finetune": {"epochs": 5},
  "sweep": {"points": [2, 6], "repeats": 2},
  "experiment": {"sources": [1, 3], "target": 2},
  "matrix": {"grid": {"sources": [[1], [3], [1, 3]], "targets": [2]}}
})";
    Verdict v;
    const std::pair<std::vector<std::string>, std::vector<std::string>> runs[] = {
        {{"pretrain"}, {"model.bin", "stats.csv", "history.csv"}},
        {{"finetune", "--set", "finetune_run.per_class_n=4"}, {"model_pt.bin", "model_st.bin", "comparison.csv"}},
        {{"sweep"}, {"scores.csv", "pairs.csv"}},
        {{"matrix", "--jobs", "2"}, {"scores.csv", "pairs.csv"}},
    };
    int compared = 0;
    for (const auto& [cmd, files] : runs) {
        const auto a = dir / (cmd[0] + "_a");
        const auto b = dir / (cmd[0] + "_b");
        for (const auto& out : {a, b}) {
            auto args = cmd;
            args.insert(args.end(), {"--config", config.string(), "--seed", "99", "--out", out.string()});
            v.require(run_cli(args) == cli::kExitOk, cmd[0] + " failed");
        }
        for (const auto& f : files) {
            const auto x = testing::slurp(a / f);
            v.require(!x.empty() && x == testing::slurp(b / f), cmd[0] + ": " + f + " differs");
            ++compared;
        }
    }
    v.detail = fmt("%d output files compared across reruns", compared) + (v.pass ? "" : " -- " + v.detail);
    return v;
}

// ---------------------------------------------------------------------------
// 10. Source/target disjointness.

Verdict disjointness() {
    Verdict v;
    GeneratorSpec spec;
    spec.shared_weights_seed = 10;
    spec.companies = {{.company_id = 1, .n_rows = 300, .minority_fraction = 0.3},
                      {.company_id = 2, .n_rows = 300, .minority_fraction = 0.3}};
    const auto table = testing::synthetic_table(spec, 10);

    double slowest = 0.0;
    const std::vector<std::vector<int>> overlapping = {{2}, {1, 2}};
    for (const auto& sources : overlapping) {
        ExperimentConfig cfg;
        cfg.source_company_ids = sources;
        cfg.target_company_id = 2;
        cfg.pretrain.epochs = 1'000'000;  // hours of work if training ever started
        cfg.sweep.points = {2};
        const auto start = std::chrono::steady_clock::now();
        bool rejected = false;
        try {
            plan_experiment(cfg, table);
        } catch (const DisjointnessError&) {
            rejected = true;
        }
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        v.require(rejected, "overlapping source accepted");
    }
    v.require(slowest < kOverlapRejectSeconds, "rejection took too long");

    const auto& data = table.at(1).balanced;
    std::size_t shared = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto p = partition_same_company(data, derive_seed(1234, "acceptance", seed));
        const std::set<Index> a(p.pretrain_rows.begin(), p.pretrain_rows.end());
        for (Index r : p.finetune_rows) shared += a.contains(r);
        v.require(p.pretrain_rows.size() + p.finetune_rows.size() == static_cast<std::size_t>(data.rows()),
                  "partition does not cover the company");
    }
    v.require(shared == 0, "partitions share rows");
    v.detail = fmt("rejected in %.3f s; 50 partitions, %zu shared rows", slowest, shared) +
               (v.pass ? "" : " -- " + v.detail);
    return v;
}

}  // namespace

// Optional arguments pick criteria by number; by default all of them run.
int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"survey bookkeeping", survey_bookkeeping},
        {"gradient check", gradients},
        {"smote geometry", smote_geometry},
        {"optimizer oracle", optimizer},
        {"metric oracle", metric_oracle},
        {"transfer helps with shared weights", finding_transfer_helps},
        {"no benefit from scrambled pretraining", finding_bad_pretraining},
        {"more source companies", finding_more_sources},
        {"cli determinism", cli_determinism},
        {"disjointness", disjointness},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        if (!only.empty() && !only.contains(index)) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (v.pass ? "PASS" : "FAIL") << " [" << index << "] " << name << " (" << fmt("%.1f", secs)
                  << " s): " << v.detail << std::endl;
        failed += !v.pass;
    }
    return failed == 0 ? 0 : 1;
}
