// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "safenet/dataset.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace safenet {

/// Per-feature mean and population standard deviation, fitted on training rows.
struct StandardizationStats {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd stddev;  // > 0 after the degenerate-column guard
};

struct CompanySplit {
    Dataset train_pool;
    Dataset test_set;
};

/// How 0.4 * N is turned into a row count before the 200-row cap.
enum class TestSizeRounding { nearest, floor };

inline constexpr double kDefaultMissingThreshold = 0.10;
inline constexpr int kDefaultSmoteNeighbors = 5;
inline constexpr double kTestFraction = 0.4;
inline constexpr Index kTestCap = 200;
inline constexpr double kDegenerateStddev = 1e-12;

/// Drops records missing more than `missing_threshold` of their features,
/// imputes the rest with per-column medians of the surviving records and
/// binarizes the accident count.
Dataset clean(std::span<const RawRecord> records,
              double missing_threshold = kDefaultMissingThreshold);

/// Oversamples the minority class until both classes have the majority
/// count. Synthetic rows interpolate a random minority row toward one of its
/// k nearest minority neighbours. Original rows come first, unchanged.
Dataset smote_balance(const Dataset& data, int k, std::uint64_t seed);

/// Size after SMOTE for a set with `total` rows of which `minority` are in
/// the smaller class.
Index balanced_size(Index total, Index minority);

/// Test-set size for a balanced company set: min(0.4 N, 200).
Index test_size_for(Index total, TestSizeRounding rounding = TestSizeRounding::nearest);

/// Stratified random train-pool/test split sized by test_size_for().
CompanySplit split_company(const Dataset& data, std::uint64_t seed,
                           TestSizeRounding rounding = TestSizeRounding::nearest);

/// Exactly `per_class_n` rows of each class, drawn without replacement.
Dataset sample_training_subset(const Dataset& pool, Index per_class_n, std::uint64_t seed);

/// Per-class random partition; round(fraction * n_c) rows of each class go
/// to the first part. Returned index lists refer to rows of `data`.
struct StratifiedPartition {
    std::vector<Index> first;
    std::vector<Index> second;
};
StratifiedPartition stratified_partition(const Dataset& data, double first_fraction,
                                         std::uint64_t seed);

StandardizationStats fit_standardization(const Dataset& train);
Dataset apply_standardization(const StandardizationStats& stats, const Dataset& data);

struct StandardizedSets {
    Dataset train;
    std::vector<Dataset> others;
    StandardizationStats stats;
};
/// Fits statistics on `train` only and applies them to every dataset.
StandardizedSets standardize(const Dataset& train, std::span<const Dataset> others);

/// Random permutation of the labels; features and provenance are untouched.
Dataset scramble_labels(const Dataset& data, std::uint64_t seed);

}  // namespace safenet
