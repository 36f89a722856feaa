// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "safenet/data_pipeline.hpp"
#include "safenet/model.hpp"
#include "safenet/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

namespace safenet {

class TrainingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kPretrainFraction = 0.7;

struct TrainRunConfig {
    int epochs = 100;
    int batch_size = 32;
    OptimizerConfig optimizer{};
    bool use_schedule = true;  // StepLR on top of optimizer.base_lr
    InitScheme init = InitScheme::paper;
    int eval_every = 1;

    /// 100 epochs, batch 32, lr 3e-4 with StepLR(30, 0.1), weight decay 0.01.
    static TrainRunConfig pretrain_defaults();
    /// 20 epochs, batch 4, constant lr 1e-3, weight decay 0.01.
    static TrainRunConfig finetune_defaults();

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;          // 1-based
    double loss = 0.0;      // mean training loss over the epoch's batches
    double accuracy = 0.0;  // percent on the evaluation set; NaN when not evaluated
};

struct TrainedModel {
    ModelParams params;
    std::vector<EpochRecord> history;
    int selected_epoch = 0;  // epoch whose parameters were returned; 0 = initial params
    /// Set by pretrain(): the normalization its parameters expect.
    std::optional<StandardizationStats> input_stats;

    /// Evaluation accuracy of the selected epoch (percent), NaN if none.
    double selected_accuracy() const;
};

/// Mini-batch row order for one epoch. Classes are interleaved in proportion
/// after an independent shuffle of each, so batches stay roughly balanced.
/// A trailing batch of one row is dropped (batch-norm needs two).
std::vector<std::vector<Index>> epoch_batches(std::span<const int> labels, int batch_size,
                                              std::uint64_t seed, int epoch);

/// Percent of rows classified correctly in eval mode.
double evaluate_accuracy(const ModelParams& params, const Dataset& data);

/// Shared loop for fine-tuning and from-scratch training: starts from
/// `init`, trains on `train` with `cfg` and returns the final-epoch params.
TrainedModel train_from(ModelParams init, const Dataset& train, const Dataset& test,
                        const TrainRunConfig& cfg, std::uint64_t seed);

/// Stratified 70/30 split of the (raw) source set, standardization fitted on
/// the 70%, fresh init, training on the 70% and model selection by the best
/// held-out accuracy (first epoch on ties).
TrainedModel pretrain(const Dataset& source, const TrainRunConfig& cfg, std::uint64_t seed);

/// Full-model fine-tuning from pretrained parameters. Inputs must already be
/// standardized.
TrainedModel finetune(const ModelParams& pretrained, const Dataset& target_train,
                      const Dataset& target_test, const TrainRunConfig& cfg, std::uint64_t seed);

/// Same procedure as finetune() from init_params(seed, cfg.init).
TrainedModel train_from_scratch(const Dataset& target_train, const Dataset& target_test,
                                const TrainRunConfig& cfg, std::uint64_t seed);

/// Epoch/loss/accuracy sidecar table.
void save_history(const std::filesystem::path& path, std::span<const EpochRecord> history);
void save_stats(const std::filesystem::path& path, const StandardizationStats& stats);
StandardizationStats load_stats(const std::filesystem::path& path);

}  // namespace safenet
