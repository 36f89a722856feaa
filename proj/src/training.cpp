// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/training.hpp"

#include "safenet/metrics.hpp"
#include "safenet/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace safenet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double lr_for_epoch(const TrainRunConfig& cfg, int epoch) {
    return cfg.use_schedule ? scheduled_lr(epoch - 1, cfg.optimizer) : cfg.optimizer.base_lr;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, std::span<const Index> rows) {
    Eigen::MatrixXd out(static_cast<Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(rows[i]);
    return out;
}

// Runs one epoch of mini-batch AdamW, returns the row-weighted mean loss.
double train_epoch(ModelParams& params, OptimizerState& state, const Dataset& train,
                   const TrainRunConfig& cfg, std::uint64_t seed, int epoch) {
    const double lr = lr_for_epoch(cfg, epoch);
    double loss_sum = 0.0;
    Index seen = 0;
    std::vector<int> labels;
    for (const auto& batch : epoch_batches(train.labels, cfg.batch_size, seed, epoch)) {
        const Eigen::MatrixXd x = gather_rows(train.features, batch);
        labels.clear();
        for (Index r : batch) labels.push_back(train.labels[static_cast<std::size_t>(r)]);
        auto fwd = forward_train(params, x);
        auto loss = cross_entropy(fwd.logits, labels);
        const Gradients grads = backward(params, fwd.cache, loss.grad);
        adamw_step(params, grads, state, lr, cfg.optimizer);
        loss_sum += loss.loss * static_cast<double>(batch.size());
        seen += static_cast<Index>(batch.size());
    }
    return seen > 0 ? loss_sum / static_cast<double>(seen) : kNaN;
}

bool evaluate_this_epoch(const TrainRunConfig& cfg, int epoch) {
    return epoch % cfg.eval_every == 0 || epoch == cfg.epochs;
}

void require_trainable(const Dataset& train, const Dataset& test, Index feature_dim) {
    train.validate();
    test.validate();
    if (!train.has_both_classes()) throw TrainingError("training set must contain both classes");
    if (train.rows() < 2) throw TrainingError("training set needs at least 2 rows");
    if (test.rows() < 1) throw TrainingError("evaluation set is empty");
    if (train.dim() != feature_dim || test.dim() != feature_dim)
        throw TrainingError("dataset feature_dim " + std::to_string(train.dim()) +
                            " does not match model feature_dim " + std::to_string(feature_dim));
}

}  // namespace

TrainRunConfig TrainRunConfig::pretrain_defaults() {
    TrainRunConfig c;
    c.epochs = 100;
    c.batch_size = 32;
    c.optimizer.base_lr = 3e-4;
    c.use_schedule = true;
    return c;
}

TrainRunConfig TrainRunConfig::finetune_defaults() {
    TrainRunConfig c;
    c.epochs = 20;
    c.batch_size = 4;
    c.optimizer.base_lr = 1e-3;
    c.use_schedule = false;
    return c;
}

void TrainRunConfig::validate() const {
    if (epochs < 0) throw TrainingError("epochs must be >= 0");
    if (batch_size < 2) throw TrainingError("batch_size must be >= 2");
    if (eval_every < 1) throw TrainingError("eval_every must be >= 1");
    optimizer.validate();
}

double TrainedModel::selected_accuracy() const {
    if (selected_epoch < 1 || selected_epoch > static_cast<int>(history.size())) return kNaN;
    return history[static_cast<std::size_t>(selected_epoch - 1)].accuracy;
}

std::vector<std::vector<Index>> epoch_batches(std::span<const int> labels, int batch_size,
                                              std::uint64_t seed, int epoch) {
    if (batch_size < 2) throw TrainingError("batch_size must be >= 2");
    Rng rng(derive_seed(seed, "epoch_batches", static_cast<std::uint64_t>(epoch)));

    struct Keyed {
        double key;
        int label;
        Index row;
    };
    std::vector<Keyed> order;
    order.reserve(labels.size());
    for (int label : {0, 1}) {
        std::vector<Index> rows;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) rows.push_back(static_cast<Index>(i));
        std::shuffle(rows.begin(), rows.end(), rng);
        const double n = static_cast<double>(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r)
            order.push_back({(static_cast<double>(r) + 0.5) / n, label, rows[r]});
    }
    std::sort(order.begin(), order.end(), [](const Keyed& a, const Keyed& b) {
        return a.key != b.key ? a.key < b.key : a.label < b.label;
    });

    std::vector<std::vector<Index>> batches;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
        if (end - start < 2) break;
        std::vector<Index> batch;
        for (std::size_t i = start; i < end; ++i) batch.push_back(order[i].row);
        batches.push_back(std::move(batch));
    }
    return batches;
}

double evaluate_accuracy(const ModelParams& params, const Dataset& data) {
    return accuracy(predict(params, data.features), data.labels);
}

TrainedModel train_from(ModelParams init, const Dataset& train, const Dataset& test,
                        const TrainRunConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    require_trainable(train, test, init.feature_dim());
    TrainedModel out;
    out.params = std::move(init);
    auto state = OptimizerState::zeros_like(out.params);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        EpochRecord rec{epoch, train_epoch(out.params, state, train, cfg, seed, epoch), kNaN};
        if (evaluate_this_epoch(cfg, epoch)) rec.accuracy = evaluate_accuracy(out.params, test);
        out.history.push_back(rec);
    }
    out.selected_epoch = cfg.epochs;
    return out;
}

TrainedModel pretrain(const Dataset& source, const TrainRunConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    source.validate();
    if (source.rows() < 10) throw TrainingError("pretrain: source needs at least 10 rows");
    if (!source.has_both_classes()) throw TrainingError("pretrain: source must contain both classes");

    const auto part = stratified_partition(source, kPretrainFraction, derive_seed(seed, "pretrain_split"));
    const Dataset raw_train = take_rows(source, part.first);
    const Dataset raw_eval = take_rows(source, part.second);
    if (!raw_train.has_both_classes() || !raw_eval.has_both_classes())
        throw TrainingError("pretrain: 70/30 split leaves a class missing on one side");

    const Dataset others[] = {raw_eval};
    auto sets = standardize(raw_train, others);
    const Dataset& train = sets.train;
    const Dataset& eval = sets.others.front();

    TrainedModel out;
    out.input_stats = sets.stats;
    ModelParams params = init_params(derive_seed(seed, "pretrain_init"), cfg.init, source.dim());
    out.params = params;
    auto state = OptimizerState::zeros_like(params);
    double best = -1.0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        EpochRecord rec{epoch, train_epoch(params, state, train, cfg, seed, epoch), kNaN};
        if (evaluate_this_epoch(cfg, epoch)) {
            rec.accuracy = evaluate_accuracy(params, eval);
            if (rec.accuracy > best) {
                best = rec.accuracy;
                out.params = params;
                out.selected_epoch = epoch;
            }
        }
        out.history.push_back(rec);
    }
    return out;
}

TrainedModel finetune(const ModelParams& pretrained, const Dataset& target_train,
                      const Dataset& target_test, const TrainRunConfig& cfg, std::uint64_t seed) {
    return train_from(pretrained, target_train, target_test, cfg, seed);
}

TrainedModel train_from_scratch(const Dataset& target_train, const Dataset& target_test,
                                const TrainRunConfig& cfg, std::uint64_t seed) {
    return train_from(init_params(derive_seed(seed, "scratch_init"), cfg.init, target_train.dim()),
                      target_train, target_test, cfg, seed);
}

void save_history(const std::filesystem::path& path, std::span<const EpochRecord> history) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TrainingError("cannot write '" + path.string() + "'");
    out << "epoch,loss,accuracy\n";
    for (const auto& r : history)
        out << r.epoch << ',' << format_double(r.loss) << ','
            << (std::isnan(r.accuracy) ? std::string() : format_double(r.accuracy)) << '\n';
}

void save_stats(const std::filesystem::path& path, const StandardizationStats& stats) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TrainingError("cannot write '" + path.string() + "'");
    out << "feature,mean,stddev\n";
    for (Index j = 0; j < stats.mean.size(); ++j)
        out << 'q' << (j + 1) << ',' << format_double(stats.mean(j)) << ','
            << format_double(stats.stddev(j)) << '\n';
}

StandardizationStats load_stats(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TrainingError("cannot open '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    std::vector<double> mean, sd;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string name, m, s;
        if (!std::getline(row, name, ',') || !std::getline(row, m, ',') || !std::getline(row, s))
            throw TrainingError("malformed stats row: " + line);
        mean.push_back(std::stod(m));
        sd.push_back(std::stod(s));
    }
    StandardizationStats stats;
    stats.mean = Eigen::Map<Eigen::RowVectorXd>(mean.data(), static_cast<Index>(mean.size()));
    stats.stddev = Eigen::Map<Eigen::RowVectorXd>(sd.data(), static_cast<Index>(sd.size()));
    return stats;
}

}  // namespace safenet
