// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/metrics.hpp"

namespace safenet {

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size())
        throw MetricError("accuracy: predictions and labels differ in length");
    if (labels.empty()) throw MetricError("accuracy: empty input");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i];
    return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

TransferScore transfer_score(std::span<const PairedAccuracy> pairs) {
    if (pairs.empty()) throw MetricError("transfer_score: no pairs");
    std::size_t wins = 0;
    double gap = 0.0;
    double relative = 0.0;
    for (const auto& p : pairs) {
        if (p.a_st == 0.0) throw MetricError("transfer_score: from-scratch accuracy of 0 makes NME undefined");
        wins += p.a_pt > p.a_st;
        gap += p.a_pt - p.a_st;
        relative += (p.a_pt - p.a_st) / p.a_st;
    }
    const double s = static_cast<double>(pairs.size());
    return {static_cast<double>(wins) / s, gap / s, 100.0 * relative / s};
}

}  // namespace safenet
