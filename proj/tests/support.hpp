// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

// Small fixtures shared by the unit tests and the acceptance runner.

#pragma once

#include "safenet/dataset.hpp"
#include "safenet/harness.hpp"
#include "safenet/synthetic.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

namespace safenet::testing {

inline Dataset make_dataset(Eigen::MatrixXd x, std::vector<int> labels, int company = 1) {
    Dataset d;
    d.features = std::move(x);
    d.labels = std::move(labels);
    d.company.assign(d.labels.size(), company);
    return d;
}

// `n` rows of Gaussian features, the first `ones` labelled 1.
inline Dataset random_dataset(Index n, Index ones, Index dim, std::uint64_t seed, int company = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(n, dim);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < dim; ++j) x(i, j) = normal(rng);
    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < ones; ++i) labels[static_cast<std::size_t>(i)] = 1;
    return make_dataset(std::move(x), std::move(labels), company);
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("safenet_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline bool same_params(const ModelParams& a, const ModelParams& b) {
    auto& ma = const_cast<ModelParams&>(a);
    auto& mb = const_cast<ModelParams&>(b);
    auto ta = trainable_tensors(ma);
    auto tb = trainable_tensors(mb);
    for (std::size_t i = 0; i < ta.size(); ++i)
        if (!std::equal(ta[i].data.begin(), ta[i].data.end(), tb[i].data.begin(), tb[i].data.end()))
            return false;
    return a.bn1.running_mean == b.bn1.running_mean && a.bn1.running_var == b.bn1.running_var &&
           a.bn2.running_mean == b.bn2.running_mean && a.bn2.running_var == b.bn2.running_var;
}

// Company table of generated data, keyed by company id.
inline CompanyTable synthetic_table(const GeneratorSpec& spec, std::uint64_t seed) {
    const auto raw = generate(spec, seed);
    std::map<int, std::vector<RawRecord>> by_id;
    for (std::size_t i = 0; i < spec.companies.size(); ++i) by_id[spec.companies[i].company_id] = raw[i];
    return prepare_companies(by_id, DataConfig{}, seed ^ 0x5eedULL);
}

// Cheap training regime for tests that exercise plumbing rather than quality.
inline ExperimentConfig quick_experiment(std::vector<int> sources, int target) {
    ExperimentConfig c;
    c.source_company_ids = std::move(sources);
    c.target_company_id = target;
    c.pretrain.epochs = 8;
    c.finetune.epochs = 4;
    c.repeats_per_point = 2;
    c.sweep.points = {2, 5};
    c.seed = 11;
    return c;
}

// Plain full-batch logistic regression; the independent linear oracle.
inline Eigen::VectorXd fit_logistic(const Dataset& d, int iters = 400, double lr = 0.5) {
    const Index n = d.rows();
    Eigen::MatrixXd x(n, d.dim() + 1);
    x << d.features, Eigen::VectorXd::Ones(n);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) y(i) = d.labels[static_cast<std::size_t>(i)];
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d.dim() + 1);
    for (int it = 0; it < iters; ++it) {
        const Eigen::VectorXd p = (1.0 + (-(x * w).array()).exp()).inverse().matrix();
        w -= lr * x.transpose() * (p - y) / static_cast<double>(n);
    }
    return w;
}

inline double logistic_accuracy(const Eigen::VectorXd& w, const Dataset& d) {
    Index correct = 0;
    for (Index i = 0; i < d.rows(); ++i) {
        const double s = d.features.row(i).dot(w.head(d.dim())) + w(d.dim());
        correct += (s > 0 ? 1 : 0) == d.labels[static_cast<std::size_t>(i)];
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(d.rows());
}

}  // namespace safenet::testing
