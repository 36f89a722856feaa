// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace safenet {

using Index = Eigen::Index;

/// Number of Likert items in the safety-climate questionnaire.
inline constexpr int kSurveyItems = 42;

class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One questionnaire response as read from disk. Absent answers are empty.
struct RawRecord {
    std::vector<std::optional<double>> features;
    int accident_count = 0;
    int company_id = 0;
};

/// Dense, fully imputed feature matrix with binary labels. `company` records
/// per-row provenance so pooled source sets keep track of where rows came from.
struct Dataset {
    Eigen::MatrixXd features;  // rows x feature_dim
    std::vector<int> labels;   // 1 = at least one accident
    std::vector<int> company;

    Index rows() const { return features.rows(); }
    Index dim() const { return features.cols(); }
    Index count(int label) const;
    bool has_both_classes() const { return count(0) > 0 && count(1) > 0; }

    /// Throws DataError if labels/company/feature shapes disagree or a label is not 0/1.
    void validate() const;
};

Dataset take_rows(const Dataset& data, std::span<const Index> rows);
Dataset concat(std::span<const Dataset> parts);

/// Row indices (in order) whose label equals `label`.
std::vector<Index> rows_with_label(const Dataset& data, int label);

// Delimited text I/O. Header: q1..qD, accidents, company (any column order).
// Processed datasets additionally carry a `label` column.

std::vector<RawRecord> read_records(std::istream& in, int feature_dim = kSurveyItems);
std::vector<RawRecord> load_records(const std::filesystem::path& path,
                                    int feature_dim = kSurveyItems);
void write_records(std::ostream& out, std::span<const RawRecord> records, int feature_dim);
void save_records(const std::filesystem::path& path, std::span<const RawRecord> records,
                  int feature_dim);

void write_dataset(std::ostream& out, const Dataset& data);
void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace safenet
