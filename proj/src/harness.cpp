// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/harness.hpp"

#include "safenet/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <thread>

namespace safenet {

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(count);
    auto run = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const auto workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) run(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) run(i);
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

CompanyTable prepare_companies(const std::map<int, std::vector<RawRecord>>& raw,
                               const DataConfig& cfg, std::uint64_t seed) {
    CompanyTable out;
    for (const auto& [id, records] : raw) {
        CompanyData c;
        c.cleaned = clean(records, cfg.missing_threshold);
        c.balanced = smote_balance(c.cleaned, cfg.smote_k,
                                   derive_seed(seed, "company_smote", static_cast<std::uint64_t>(id)));
        out.emplace(id, std::move(c));
    }
    return out;
}

std::vector<int> SweepSchedule::resolve(Index pool_bound) const {
    if (!points.empty()) {
        for (int p : points)
            if (p < 1) throw ExperimentError("sweep points must be >= 1");
        return points;
    }
    if (start < 1) throw ExperimentError("sweep start must be >= 1");
    const int last = stop > 0 ? stop : static_cast<int>(pool_bound);
    if (last < start) throw ExperimentError("sweep stop is below sweep start");
    const int span = last - start + 1;
    const int stride = step > 0 ? step : std::max(1, (span + 49) / 50);
    std::vector<int> out;
    for (int n = start; n <= last; n += stride) out.push_back(n);
    return out;
}

void ExperimentConfig::validate() const {
    if (source_company_ids.empty()) throw ExperimentError("experiment: source company set is empty");
    std::set<int> unique(source_company_ids.begin(), source_company_ids.end());
    if (unique.size() != source_company_ids.size())
        throw ExperimentError("experiment: duplicate source company id");
    if (repeats_per_point < 1) throw ExperimentError("experiment: repeats_per_point must be >= 1");
    if (sweep.step < 0 || sweep.stop < 0) throw ExperimentError("experiment: negative sweep bound");
    pretrain.validate();
    finetune.validate();
}

std::string ExperimentConfig::source_label() const {
    std::string out;
    for (std::size_t i = 0; i < source_company_ids.size(); ++i) {
        if (i) out += '+';
        out += std::to_string(source_company_ids[i]);
    }
    return out;
}

std::string ExperimentConfig::display_name() const {
    return name.empty() ? source_label() + "-" + std::to_string(target_company_id) : name;
}

Dataset assemble_source(const CompanyTable& companies, std::span<const int> ids) {
    if (ids.empty()) throw ExperimentError("assemble_source: no company ids");
    std::vector<Dataset> parts;
    for (int id : ids) {
        auto it = companies.find(id);
        if (it == companies.end()) throw ExperimentError("unknown company id " + std::to_string(id));
        parts.push_back(it->second.balanced);
    }
    return concat(parts);
}

DisjointVerdict check_disjoint(const Dataset& source, const Dataset& target,
                               const ExperimentConfig& cfg) {
    const std::set<int> source_ids(source.company.begin(), source.company.end());
    std::set<int> shared;
    for (int c : target.company)
        if (source_ids.contains(c)) shared.insert(c);
    if (shared.empty()) return {true, "source and target companies are disjoint"};

    const bool single_same_company = cfg.source_company_ids.size() == 1 &&
                                     cfg.source_company_ids.front() == cfg.target_company_id;
    if (cfg.same_company_disjoint && single_same_company)
        return {true, "same-company protocol: disjoint 60/40 pretrain/fine-tune partition"};
    if (cfg.allow_overlap) return {true, "overlap explicitly allowed"};
    std::string ids;
    for (int c : shared) ids += (ids.empty() ? "" : ",") + std::to_string(c);
    return {false, "target company data also present in the source set (company " + ids + ")"};
}

SameCompanyPartition partition_same_company(const Dataset& data, std::uint64_t seed) {
    auto part = stratified_partition(data, kSameCompanyPretrainFraction,
                                     derive_seed(seed, "same_company_partition"));
    SameCompanyPartition out;
    out.pretrain_part = take_rows(data, part.first);
    out.finetune_part = take_rows(data, part.second);
    out.pretrain_rows = std::move(part.first);
    out.finetune_rows = std::move(part.second);
    return out;
}

namespace {

const CompanyData& company(const CompanyTable& companies, int id) {
    auto it = companies.find(id);
    if (it == companies.end()) throw ExperimentError("unknown company id " + std::to_string(id));
    return it->second;
}

}  // namespace

namespace {

ExperimentPlan make_plan(const ExperimentConfig& cfg, const CompanyTable& companies,
                         const TrainedModel* given) {
    cfg.validate();
    for (int id : cfg.source_company_ids) company(companies, id);
    const CompanyData& target = company(companies, cfg.target_company_id);

    Dataset source = assemble_source(companies, cfg.source_company_ids);
    const auto verdict = check_disjoint(source, target.balanced, cfg);
    if (!verdict.ok) throw DisjointnessError(cfg.display_name() + ": " + verdict.reason);

    const bool same_company = cfg.same_company_disjoint && cfg.source_company_ids.size() == 1 &&
                              cfg.source_company_ids.front() == cfg.target_company_id;
    Dataset target_balanced = target.balanced;
    if (same_company) {
        auto part = partition_same_company(target.balanced, derive_seed(cfg.seed, "same_company"));
        source = std::move(part.pretrain_part);
        target_balanced = std::move(part.finetune_part);
    }
    if (cfg.scramble_source_labels) source = scramble_labels(source, derive_seed(cfg.seed, "scramble"));

    ExperimentPlan plan;
    plan.config = cfg;
    if (given) {
        if (!given->input_stats) throw ExperimentError("pretrained model has no input statistics");
        if (given->params.feature_dim() != source.dim())
            throw ExperimentError("pretrained model expects " + std::to_string(given->params.feature_dim()) +
                                  " features, data has " + std::to_string(source.dim()));
        plan.pretrained = *given;
    } else {
        plan.pretrained = pretrain(source, cfg.pretrain, derive_seed(cfg.seed, "pretrain"));
    }

    const auto split_seed = derive_seed(cfg.seed, "target_split");
    if (cfg.data.smote_after_split && !same_company) {
        auto split = split_company(target.cleaned, split_seed, cfg.data.test_rounding);
        plan.raw_pool = smote_balance(split.train_pool, cfg.data.smote_k,
                                      derive_seed(cfg.seed, "pool_smote"));
        plan.raw_test = std::move(split.test_set);
    } else {
        auto split = split_company(target_balanced, split_seed, cfg.data.test_rounding);
        plan.raw_pool = std::move(split.train_pool);
        plan.raw_test = std::move(split.test_set);
    }
    plan.pool_bound = std::min(plan.raw_pool.count(0), plan.raw_pool.count(1));
    plan.points = cfg.sweep.resolve(plan.pool_bound);
    for (int p : plan.points)
        if (p > plan.pool_bound)
            throw ExperimentError(cfg.display_name() + ": sweep point " + std::to_string(p) +
                                  " exceeds the " + std::to_string(plan.pool_bound) +
                                  " rows per class in the target training pool");

    plan.pool = apply_standardization(*plan.pretrained.input_stats, plan.raw_pool);
    plan.test = apply_standardization(*plan.pretrained.input_stats, plan.raw_test);
    return plan;
}

}  // namespace

ExperimentPlan plan_experiment(const ExperimentConfig& cfg, const CompanyTable& companies) {
    return make_plan(cfg, companies, nullptr);
}

ExperimentPlan plan_experiment(const ExperimentConfig& cfg, const CompanyTable& companies,
                               const TrainedModel& pretrained) {
    return make_plan(cfg, companies, &pretrained);
}

SweepDraw draw_sweep_point(const ExperimentPlan& plan, int per_class_n, int repeat) {
    const auto& cfg = plan.config;
    const auto n = static_cast<std::uint64_t>(per_class_n);
    const auto r = static_cast<std::uint64_t>(repeat);
    const auto subset_seed = derive_seed(cfg.seed, "subset", n, r);
    SweepDraw draw;
    draw.train_seed = derive_seed(cfg.seed, "train", n, r);
    if (cfg.restandardize_on_target) {
        const Dataset raw = sample_training_subset(plan.raw_pool, per_class_n, subset_seed);
        const auto stats = fit_standardization(raw);
        draw.train = apply_standardization(stats, raw);
        draw.test = apply_standardization(stats, plan.raw_test);
    } else {
        draw.train = sample_training_subset(plan.pool, per_class_n, subset_seed);
        draw.test = plan.test;
    }
    return draw;
}

PairedAccuracy run_sweep_point(const ExperimentPlan& plan, int per_class_n, int repeat) {
    const auto draw = draw_sweep_point(plan, per_class_n, repeat);
    const auto& ft_cfg = plan.config.finetune;
    const auto pt = finetune(plan.pretrained.params, draw.train, draw.test, ft_cfg, draw.train_seed);
    const auto st = train_from_scratch(draw.train, draw.test, ft_cfg, draw.train_seed);
    return {per_class_n, evaluate_accuracy(pt.params, draw.test),
            evaluate_accuracy(st.params, draw.test), repeat};
}

SweepResult run_experiment(const ExperimentConfig& cfg, const CompanyTable& companies, int jobs) {
    const ExperimentPlan plan = plan_experiment(cfg, companies);
    SweepResult out;
    out.config = cfg;
    out.pretrain_accuracy = plan.pretrained.selected_accuracy();

    const std::size_t repeats = static_cast<std::size_t>(cfg.repeats_per_point);
    out.pairs.resize(plan.points.size() * repeats);
    parallel_for(out.pairs.size(), jobs, [&](std::size_t i) {
        out.pairs[i] = run_sweep_point(plan, plan.points[i / repeats], static_cast<int>(i % repeats));
    });
    out.score = transfer_score(out.pairs);
    return out;
}

std::vector<int> MatrixReport::targets() const {
    std::set<int> ids;
    for (const auto& c : cells) ids.insert(c.config.target_company_id);
    return {ids.begin(), ids.end()};
}

std::vector<std::string> MatrixReport::source_sets() const {
    std::vector<std::string> out;
    for (const auto& c : cells) {
        auto label = c.config.source_label();
        if (std::find(out.begin(), out.end(), label) == out.end()) out.push_back(label);
    }
    return out;
}

const MatrixCell* MatrixReport::find(int target, const std::string& source_set) const {
    for (const auto& c : cells)
        if (c.config.target_company_id == target && c.config.source_label() == source_set) return &c;
    return nullptr;
}

MatrixReport run_matrix(std::span<const ExperimentConfig> configs, const CompanyTable& companies,
                        int jobs) {
    MatrixReport report;
    report.cells.resize(configs.size());
    // Parallelize across cells when there are enough of them, otherwise inside each sweep.
    const bool across_cells = configs.size() >= static_cast<std::size_t>(std::max(jobs, 1));
    const int outer = across_cells ? jobs : 1;
    const int inner = across_cells ? 1 : jobs;
    parallel_for(configs.size(), outer, [&](std::size_t i) {
        auto& cell = report.cells[i];
        cell.config = configs[i];
        try {
            cell.result = run_experiment(configs[i], companies, inner);
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });
    return report;
}

}  // namespace safenet
