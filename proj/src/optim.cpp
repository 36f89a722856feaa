// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/optim.hpp"

#include <cmath>

namespace safenet {

void OptimizerConfig::validate() const {
    if (!(base_lr > 0.0)) throw OptimizerError("optimizer: base_lr must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw OptimizerError("optimizer: beta1 must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw OptimizerError("optimizer: beta2 must lie in [0, 1)");
    if (!(eps > 0.0)) throw OptimizerError("optimizer: eps must be > 0");
    if (!(weight_decay >= 0.0)) throw OptimizerError("optimizer: weight_decay must be >= 0");
    if (step_size < 1) throw OptimizerError("optimizer: step_size must be >= 1");
    if (!(gamma > 0.0)) throw OptimizerError("optimizer: gamma must be > 0");
}

OptimizerState OptimizerState::zeros_like(const ModelParams& params) {
    return {Gradients::zeros_like(params), Gradients::zeros_like(params), 0};
}

void adamw_step(ModelParams& params, const Gradients& grads, OptimizerState& state, double lr,
                const OptimizerConfig& cfg) {
    if (!grads.all_finite()) throw OptimizerError("adamw: non-finite gradient, step not applied");
    if (!(lr >= 0.0)) throw OptimizerError("adamw: learning rate must be >= 0");

    auto theta = trainable_tensors(params);
    auto g = gradient_tensors(grads);
    auto m = gradient_tensors(state.m);
    auto v = gradient_tensors(state.v);
    for (std::size_t t = 0; t < theta.size(); ++t)
        if (theta[t].data.size() != g[t].data.size() || m[t].data.size() != g[t].data.size() ||
            v[t].data.size() != g[t].data.size())
            throw OptimizerError("adamw: parameter and gradient shapes disagree");

    const std::int64_t step = state.step_count + 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t t = 0; t < theta.size(); ++t) {
        const double decay = theta[t].decay ? lr * cfg.weight_decay : 0.0;
        auto th = theta[t].data;
        auto gt = g[t].data;
        auto mt = m[t].data;
        auto vt = v[t].data;
        for (std::size_t i = 0; i < th.size(); ++i) {
            mt[i] = cfg.beta1 * mt[i] + (1.0 - cfg.beta1) * gt[i];
            vt[i] = cfg.beta2 * vt[i] + (1.0 - cfg.beta2) * gt[i] * gt[i];
            const double m_hat = mt[i] / bc1;
            const double v_hat = vt[i] / bc2;
            th[i] = th[i] - lr * m_hat / (std::sqrt(v_hat) + cfg.eps) - decay * th[i];
        }
    }
    state.step_count = step;
}

double scheduled_lr(int epoch, const OptimizerConfig& cfg) {
    if (epoch < 0) throw OptimizerError("scheduled_lr: epoch must be >= 0");
    return cfg.base_lr * std::pow(cfg.gamma, static_cast<double>(epoch / cfg.step_size));
}

}  // namespace safenet
