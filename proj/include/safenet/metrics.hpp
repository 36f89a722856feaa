// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <stdexcept>

namespace safenet {

class MetricError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Accuracies of the pretrain-then-fine-tune (pt) and from-scratch (st)
/// models at one training-set size and repeat, in percent.
struct PairedAccuracy {
    int per_class_n = 0;
    double a_pt = 0.0;
    double a_st = 0.0;
    int repeat_index = 0;
};

struct TransferScore {
    double ep = 0.0;   // fraction of pairs with a_pt > a_st; ties count against
    double me = 0.0;   // mean of a_pt - a_st, percentage points
    double nme = 0.0;  // 100 * mean of (a_pt - a_st) / a_st, percent
};

/// 100 * correct / total.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

inline double difference_accuracy(double a_pt, double a_st) { return a_pt - a_st; }

/// Throws MetricError on an empty list or a zero from-scratch accuracy.
TransferScore transfer_score(std::span<const PairedAccuracy> pairs);

}  // namespace safenet
