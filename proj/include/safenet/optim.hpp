// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "safenet/model.hpp"

#include <cstdint>
#include <stdexcept>

namespace safenet {

class OptimizerError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// AdamW hyperparameters plus the StepLR schedule applied on top of base_lr.
struct OptimizerConfig {
    double base_lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
    int step_size = 30;  // epochs between decays
    double gamma = 0.1;

    void validate() const;
};

struct OptimizerState {
    Gradients m;
    Gradients v;
    std::int64_t step_count = 0;

    static OptimizerState zeros_like(const ModelParams& params);
};

/// One AdamW update in place:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta
/// Decay is skipped for batch-norm scale/shift; running statistics are never
/// touched. Throws OptimizerError on a non-finite gradient without modifying
/// params or state.
void adamw_step(ModelParams& params, const Gradients& grads, OptimizerState& state, double lr,
                const OptimizerConfig& cfg);

/// base_lr * gamma^floor(epoch / step_size), epochs counted from 0.
double scheduled_lr(int epoch, const OptimizerConfig& cfg);

}  // namespace safenet
