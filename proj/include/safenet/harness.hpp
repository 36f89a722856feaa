// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "safenet/data_pipeline.hpp"
#include "safenet/metrics.hpp"
#include "safenet/training.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace safenet {

class ExperimentError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised before any training when source and target data overlap.
class DisjointnessError : public ExperimentError {
  public:
    using ExperimentError::ExperimentError;
};

/// One company after cleaning, before and after SMOTE.
struct CompanyData {
    Dataset cleaned;
    Dataset balanced;
};
using CompanyTable = std::map<int, CompanyData>;

struct DataConfig {
    double missing_threshold = kDefaultMissingThreshold;
    int smote_k = kDefaultSmoteNeighbors;
    /// Balance only the target's training pool, after the test split.
    bool smote_after_split = false;
    TestSizeRounding test_rounding = TestSizeRounding::nearest;
};

/// clean() + smote_balance() for every company; SMOTE seeds derive from
/// (seed, company id).
CompanyTable prepare_companies(const std::map<int, std::vector<RawRecord>>& raw,
                               const DataConfig& cfg, std::uint64_t seed);

/// Per-class training-set sizes to sweep. With no explicit points the
/// schedule runs start..stop by step; stop = 0 means "up to the pool bound"
/// and step = 0 picks a step giving about 50 points.
struct SweepSchedule {
    int start = 1;
    int stop = 0;
    int step = 0;
    std::vector<int> points;

    std::vector<int> resolve(Index pool_bound) const;
};

struct ExperimentConfig {
    std::string name;  // defaults to "<sources>-<target>"
    std::vector<int> source_company_ids;
    int target_company_id = 0;
    SweepSchedule sweep;
    int repeats_per_point = 5;
    bool allow_overlap = false;          // diagonal protocol: pretrain on the target company itself
    bool same_company_disjoint = false;  // 60/40 pretrain/fine-tune partition of one company
    bool scramble_source_labels = false; // low-pretrain-accuracy error case
    bool restandardize_on_target = false;
    DataConfig data;
    TrainRunConfig pretrain = TrainRunConfig::pretrain_defaults();
    TrainRunConfig finetune = TrainRunConfig::finetune_defaults();
    std::uint64_t seed = 0;

    void validate() const;
    std::string source_label() const;  // e.g. "4+5"
    std::string display_name() const;
};

/// Row concatenation of the balanced datasets of `ids`, in the given order.
Dataset assemble_source(const CompanyTable& companies, std::span<const int> ids);

struct DisjointVerdict {
    bool ok = true;
    std::string reason;
};

/// Violation iff a target row's company appears in the source and neither
/// allow_overlap nor the same-company 60/40 protocol applies.
DisjointVerdict check_disjoint(const Dataset& source, const Dataset& target,
                               const ExperimentConfig& cfg);

inline constexpr double kSameCompanyPretrainFraction = 0.6;

struct SameCompanyPartition {
    Dataset pretrain_part;
    Dataset finetune_part;
    std::vector<Index> pretrain_rows;  // indices into the partitioned dataset
    std::vector<Index> finetune_rows;
};
SameCompanyPartition partition_same_company(const Dataset& data, std::uint64_t seed);

/// Everything fixed before the sweep starts: the pretrained model, the
/// standardized target pool/test split and the resolved sweep points.
struct ExperimentPlan {
    ExperimentConfig config;
    TrainedModel pretrained;
    Dataset raw_pool;
    Dataset raw_test;
    Dataset pool;  // standardized with the pretraining statistics
    Dataset test;
    Index pool_bound = 0;  // rows available per class in the pool
    std::vector<int> points;
};

ExperimentPlan plan_experiment(const ExperimentConfig& cfg, const CompanyTable& companies);

/// Same as above but reuses an existing pretrained model (which must carry
/// its input statistics) instead of pretraining. Disjointness is still checked.
ExperimentPlan plan_experiment(const ExperimentConfig& cfg, const CompanyTable& companies,
                               const TrainedModel& pretrained);

/// Training subset and seed shared by both models at one (point, repeat).
struct SweepDraw {
    Dataset train;
    Dataset test;
    std::uint64_t train_seed = 0;
};
SweepDraw draw_sweep_point(const ExperimentPlan& plan, int per_class_n, int repeat);

/// Fine-tunes from the pretrained parameters and trains from scratch on the
/// same draw, returning both test accuracies.
PairedAccuracy run_sweep_point(const ExperimentPlan& plan, int per_class_n, int repeat);

struct SweepResult {
    ExperimentConfig config;
    double pretrain_accuracy = 0.0;  // percent on the 30% source hold-out
    std::vector<PairedAccuracy> pairs;
    TransferScore score;
};

/// Pretrains once, then runs every (point, repeat) pair, up to `jobs` at a
/// time. Results do not depend on `jobs`.
SweepResult run_experiment(const ExperimentConfig& cfg, const CompanyTable& companies, int jobs = 1);

struct MatrixCell {
    ExperimentConfig config;
    std::optional<SweepResult> result;
    std::string error;
};

struct MatrixReport {
    std::vector<MatrixCell> cells;

    std::vector<int> targets() const;              // ascending
    std::vector<std::string> source_sets() const;  // first-appearance order
    const MatrixCell* find(int target, const std::string& source_set) const;
};

/// Runs every config; a failing cell records its error and never aborts the matrix.
MatrixReport run_matrix(std::span<const ExperimentConfig> configs, const CompanyTable& companies,
                        int jobs = 1);

/// Calls fn(i) for i in [0, count) on up to `jobs` threads; rethrows the
/// first exception by index after all tasks finish.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace safenet
