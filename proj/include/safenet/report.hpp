// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "safenet/harness.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace safenet {

/// Mean and sample standard deviation of both accuracies at one training size.
struct CurvePoint {
    int per_class_n = 0;
    double mean_pt = 0.0;
    double std_pt = 0.0;
    double mean_st = 0.0;
    double std_st = 0.0;
    int count = 0;
};

std::vector<CurvePoint> aggregate_curve(std::span<const PairedAccuracy> pairs);

/// Accuracy-vs-training-size table behind the fine-tuned / from-scratch curves.
void emit_plot_data(const SweepResult& result, const std::filesystem::path& path);
void write_curve(const std::filesystem::path& path, std::span<const CurvePoint> curve);
std::vector<CurvePoint> read_curve(const std::filesystem::path& path);

/// Mean accuracy gain (a_pt - a_st) per number of pooled source companies.
struct SourceSizePoint {
    int source_set_size = 0;
    double mean_da = 0.0;
    double std_err = 0.0;
    int count = 0;
};

std::vector<SourceSizePoint> aggregate_by_source_size(std::span<const SweepResult> results);
void write_source_size_curve(const std::filesystem::path& path,
                             std::span<const SourceSizePoint> points);
std::vector<SourceSizePoint> read_source_size_curve(const std::filesystem::path& path);

/// One line of pairs.csv.
struct PairRecord {
    std::string experiment;
    int target = 0;
    std::string source_set;
    PairedAccuracy pair;
};

/// One line of scores.csv; `ok` is false for a failed matrix cell.
struct ScoreRow {
    int target = 0;
    std::string source_set;
    bool ok = false;
    double pretrain_acc = 0.0;
    TransferScore score;
};

MatrixReport single_cell_report(SweepResult result);

// scores.csv: target,source_set,pretrain_acc,EP,ME,NME (one row per cell)
void write_scores_csv(const std::filesystem::path& path, const MatrixReport& report);
std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path);

// pairs.csv: experiment,target,source_set,per_class_n,repeat,a_pt,a_st,da
void write_pairs_csv(const std::filesystem::path& path, const MatrixReport& report);
std::vector<PairRecord> read_pairs_csv(const std::filesystem::path& path);

/// ep_matrix.csv, me_matrix.csv, nme_matrix.csv (target rows x source-set
/// columns, empty cell when not run or failed) and pretrain_accuracy.csv.
/// Returns the written paths.
std::vector<std::filesystem::path> write_matrix_tables(const std::filesystem::path& dir,
                                                       const MatrixReport& report);

}  // namespace safenet
