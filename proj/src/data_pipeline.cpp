// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/data_pipeline.hpp"

#include "safenet/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace safenet {

namespace {

double median_of(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<Index> shuffled(std::vector<Index> rows, Rng& rng) {
    std::shuffle(rows.begin(), rows.end(), rng);
    return rows;
}

}  // namespace

Dataset clean(std::span<const RawRecord> records, double missing_threshold) {
    if (records.empty()) throw DataError("clean: no records");
    const std::size_t dim = records.front().features.size();
    if (dim == 0) throw DataError("clean: records have no features");

    std::vector<const RawRecord*> kept;
    for (const auto& r : records) {
        if (r.features.size() != dim) throw DataError("clean: records disagree on feature count");
        const auto missing = std::count_if(r.features.begin(), r.features.end(),
                                           [](const auto& f) { return !f.has_value(); });
        if (static_cast<double>(missing) / static_cast<double>(dim) > missing_threshold) continue;
        kept.push_back(&r);
    }
    if (kept.empty()) throw DataError("clean: every record exceeds the missing-value threshold");

    Dataset out;
    out.features.resize(static_cast<Index>(kept.size()), static_cast<Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
        std::vector<double> present;
        for (const auto* r : kept)
            if (r->features[j]) present.push_back(*r->features[j]);
        if (present.empty())
            throw DataError("clean: column q" + std::to_string(j + 1) +
                            " has no values among retained records");
        const double fill = median_of(present);
        for (std::size_t i = 0; i < kept.size(); ++i)
            out.features(static_cast<Index>(i), static_cast<Index>(j)) =
                kept[i]->features[j].value_or(fill);
    }
    for (const auto* r : kept) {
        out.labels.push_back(r->accident_count > 0 ? 1 : 0);
        out.company.push_back(r->company_id);
    }
    return out;
}

Index balanced_size(Index total, Index minority) {
    return 2 * std::max(total - minority, minority);
}

Dataset smote_balance(const Dataset& data, int k, std::uint64_t seed) {
    data.validate();
    if (k < 1) throw DataError("smote: neighbour count must be >= 1");
    const Index ones = data.count(1);
    const Index zeros = data.count(0);
    if (ones == 0 || zeros == 0) throw DataError("smote: input must contain both classes");
    if (ones == zeros) return data;

    const int minority_label = ones < zeros ? 1 : 0;
    const auto minority = rows_with_label(data, minority_label);
    const Index m = static_cast<Index>(minority.size());
    if (m < 2) throw DataError("smote: minority class needs at least two rows");
    const Index need = std::max(ones, zeros) - m;
    const Index kk = std::min<Index>(k, m - 1);

    // k nearest minority neighbours of every minority row (ties by row order).
    std::vector<std::vector<Index>> neighbours(static_cast<std::size_t>(m));
    std::vector<std::pair<double, Index>> dist;
    for (Index a = 0; a < m; ++a) {
        dist.clear();
        const auto xa = data.features.row(minority[static_cast<std::size_t>(a)]);
        for (Index b = 0; b < m; ++b) {
            if (b == a) continue;
            dist.emplace_back((data.features.row(minority[static_cast<std::size_t>(b)]) - xa)
                                  .squaredNorm(),
                              b);
        }
        std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
        auto& nb = neighbours[static_cast<std::size_t>(a)];
        for (Index i = 0; i < kk; ++i) nb.push_back(dist[static_cast<std::size_t>(i)].second);
    }

    Dataset out;
    out.features.resize(data.rows() + need, data.dim());
    out.features.topRows(data.rows()) = data.features;
    out.labels = data.labels;
    out.company = data.company;
    out.labels.reserve(static_cast<std::size_t>(data.rows() + need));
    out.company.reserve(static_cast<std::size_t>(data.rows() + need));

    Rng rng(derive_seed(seed, "smote"));
    std::uniform_int_distribution<Index> pick_row(0, m - 1);
    std::uniform_int_distribution<Index> pick_nb(0, kk - 1);
    std::uniform_real_distribution<double> pick_lambda(0.0, 1.0);
    for (Index s = 0; s < need; ++s) {
        const Index a = pick_row(rng);
        const Index b = neighbours[static_cast<std::size_t>(a)][static_cast<std::size_t>(pick_nb(rng))];
        const double lambda = pick_lambda(rng);
        const Index ra = minority[static_cast<std::size_t>(a)];
        const Index rb = minority[static_cast<std::size_t>(b)];
        out.features.row(data.rows() + s) =
            data.features.row(ra) + lambda * (data.features.row(rb) - data.features.row(ra));
        out.labels.push_back(minority_label);
        out.company.push_back(data.company[static_cast<std::size_t>(ra)]);
    }
    return out;
}

Index test_size_for(Index total, TestSizeRounding rounding) {
    const double raw = kTestFraction * static_cast<double>(total);
    const Index n = rounding == TestSizeRounding::nearest ? static_cast<Index>(std::llround(raw))
                                                          : static_cast<Index>(std::floor(raw));
    return std::min(n, kTestCap);
}

CompanySplit split_company(const Dataset& data, std::uint64_t seed, TestSizeRounding rounding) {
    data.validate();
    const Index total = data.rows();
    if (total < 5) throw DataError("split_company: need at least 5 rows");
    const Index test_n = test_size_for(total, rounding);

    const Index ones = data.count(1);
    const Index zeros = total - ones;
    Index test_ones = static_cast<Index>(std::llround(static_cast<double>(test_n) *
                                                      static_cast<double>(ones) /
                                                      static_cast<double>(total)));
    test_ones = std::clamp<Index>(test_ones, 1, std::max<Index>(ones - 1, 1));
    const Index test_zeros = test_n - test_ones;
    if (ones < 2 || zeros < 2 || test_ones >= ones || test_zeros < 1 || test_zeros >= zeros)
        throw DataError("split_company: too few rows to represent both classes in test and pool");

    Rng rng(derive_seed(seed, "split_company"));
    auto zero_rows = shuffled(rows_with_label(data, 0), rng);
    auto one_rows = shuffled(rows_with_label(data, 1), rng);

    std::vector<Index> test, pool;
    test.insert(test.end(), zero_rows.begin(), zero_rows.begin() + test_zeros);
    test.insert(test.end(), one_rows.begin(), one_rows.begin() + test_ones);
    pool.insert(pool.end(), zero_rows.begin() + test_zeros, zero_rows.end());
    pool.insert(pool.end(), one_rows.begin() + test_ones, one_rows.end());
    std::sort(test.begin(), test.end());
    std::sort(pool.begin(), pool.end());
    return {take_rows(data, pool), take_rows(data, test)};
}

Dataset sample_training_subset(const Dataset& pool, Index per_class_n, std::uint64_t seed) {
    if (per_class_n < 1) throw DataError("sample_training_subset: per_class_n must be >= 1");
    const Index avail = std::min(pool.count(0), pool.count(1));
    if (per_class_n > avail)
        throw DataError("sample_training_subset: per_class_n " + std::to_string(per_class_n) +
                        " exceeds the " + std::to_string(avail) + " rows available per class");
    Rng rng(derive_seed(seed, "subset"));
    std::vector<Index> chosen;
    for (int label : {0, 1}) {
        auto rows = shuffled(rows_with_label(pool, label), rng);
        chosen.insert(chosen.end(), rows.begin(), rows.begin() + per_class_n);
    }
    std::sort(chosen.begin(), chosen.end());
    return take_rows(pool, chosen);
}

StratifiedPartition stratified_partition(const Dataset& data, double first_fraction,
                                         std::uint64_t seed) {
    if (!(first_fraction >= 0.0 && first_fraction <= 1.0))
        throw DataError("stratified_partition: fraction must lie in [0, 1]");
    Rng rng(derive_seed(seed, "stratified_partition"));
    StratifiedPartition part;
    for (int label : {0, 1}) {
        auto rows = shuffled(rows_with_label(data, label), rng);
        const auto n_first = static_cast<std::ptrdiff_t>(
            std::llround(first_fraction * static_cast<double>(rows.size())));
        part.first.insert(part.first.end(), rows.begin(), rows.begin() + n_first);
        part.second.insert(part.second.end(), rows.begin() + n_first, rows.end());
    }
    std::sort(part.first.begin(), part.first.end());
    std::sort(part.second.begin(), part.second.end());
    return part;
}

StandardizationStats fit_standardization(const Dataset& train) {
    if (train.rows() < 2) throw DataError("standardize: training set needs at least 2 rows");
    StandardizationStats s;
    s.mean = train.features.colwise().mean();
    const Eigen::MatrixXd centered = train.features.rowwise() - s.mean;
    s.stddev = (centered.array().square().colwise().sum() / static_cast<double>(train.rows()))
                   .sqrt()
                   .matrix();
    for (Index j = 0; j < s.stddev.size(); ++j)
        if (s.stddev(j) < kDegenerateStddev) s.stddev(j) = 1.0;
    return s;
}

Dataset apply_standardization(const StandardizationStats& stats, const Dataset& data) {
    if (stats.mean.size() != data.dim())
        throw DataError("standardize: statistics and dataset disagree on feature_dim");
    Dataset out = data;
    out.features = ((data.features.rowwise() - stats.mean).array().rowwise() /
                    stats.stddev.array())
                       .matrix();
    return out;
}

StandardizedSets standardize(const Dataset& train, std::span<const Dataset> others) {
    StandardizedSets out;
    out.stats = fit_standardization(train);
    out.train = apply_standardization(out.stats, train);
    for (const auto& d : others) out.others.push_back(apply_standardization(out.stats, d));
    return out;
}

Dataset scramble_labels(const Dataset& data, std::uint64_t seed) {
    Dataset out = data;
    Rng rng(derive_seed(seed, "scramble_labels"));
    std::shuffle(out.labels.begin(), out.labels.end(), rng);
    return out;
}

}  // namespace safenet
