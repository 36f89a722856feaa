// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "safenet/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace safenet {

inline constexpr Index kHidden1 = 64;
inline constexpr Index kHidden2 = 128;
inline constexpr Index kClasses = 2;
inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

class ModelError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Fully connected layer, y = x * weight + bias (weight is in x out).
struct Linear {
    Eigen::MatrixXd weight;
    Eigen::RowVectorXd bias;
};

struct BatchNormAffine {
    Eigen::RowVectorXd scale;
    Eigen::RowVectorXd shift;
};

struct BatchNorm {
    BatchNormAffine affine;
    Eigen::RowVectorXd running_mean;
    Eigen::RowVectorXd running_var;
};

// SafeNet:
//   h1 = ReLU(BN1(fc1(x)))          feature_dim -> 64
//   h2 = ReLU(BN2(fc2(h1)))         64 -> 128
//   h3 = h2 + fc3(h2)               residual block, 128 -> 128
//   logits = head(h3)               128 -> 2
struct ModelParams {
    Linear fc1;
    BatchNorm bn1;
    Linear fc2;
    BatchNorm bn2;
    Linear fc3;
    Linear head;

    Index feature_dim() const { return fc1.weight.rows(); }
    bool all_finite() const;
};

struct Gradients {
    Linear fc1;
    BatchNormAffine bn1;
    Linear fc2;
    BatchNormAffine bn2;
    Linear fc3;
    Linear head;

    static Gradients zeros_like(const ModelParams& params);
    bool all_finite() const;
};

/// A named view of one trainable tensor. `decay` is false for batch-norm
/// scale/shift, which are excluded from weight decay.
template <class T>
struct BasicTensorSlot {
    std::string_view name;
    std::span<T> data;
    bool decay;
};
using TensorSlot = BasicTensorSlot<double>;
using ConstTensorSlot = BasicTensorSlot<const double>;

/// The twelve trainable tensors in serialization order.
std::vector<TensorSlot> trainable_tensors(ModelParams& params);
std::vector<TensorSlot> gradient_tensors(Gradients& grads);
std::vector<ConstTensorSlot> gradient_tensors(const Gradients& grads);

enum class InitScheme {
    paper,   // every weight and bias i.i.d. N(0, 1)
    scaled,  // weights N(0, 1/fan_in), biases N(0, 1)
};

ModelParams init_params(std::uint64_t seed, InitScheme scheme = InitScheme::paper,
                        Index feature_dim = kSurveyItems);

/// Intermediates of a training-mode forward pass, consumed by backward().
struct ForwardCache {
    Eigen::MatrixXd input;
    Eigen::MatrixXd bn1_normalized;
    Eigen::RowVectorXd bn1_inv_std;
    Eigen::MatrixXd h1;
    Eigen::MatrixXd bn2_normalized;
    Eigen::RowVectorXd bn2_inv_std;
    Eigen::MatrixXd h2;
    Eigen::MatrixXd h3;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> relu1_active;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> relu2_active;
    Index batch() const { return input.rows(); }
};

struct TrainForward {
    Eigen::MatrixXd logits;
    ForwardCache cache;
};

/// Training-mode pass: batch statistics, running statistics updated in place.
TrainForward forward_train(ModelParams& params, const Eigen::MatrixXd& batch);

/// Evaluation-mode pass using running statistics. Pure.
Eigen::MatrixXd forward_eval(const ModelParams& params, const Eigen::MatrixXd& batch);

struct LossResult {
    double loss;
    Eigen::MatrixXd grad;  // dLoss/dLogits
};

/// Mean softmax cross-entropy over the batch and its gradient.
LossResult cross_entropy(const Eigen::MatrixXd& logits, std::span<const int> labels);

Gradients backward(const ModelParams& params, const ForwardCache& cache,
                   const Eigen::MatrixXd& grad_logits);

/// Argmax of the two logits; exact ties go to label 0.
std::vector<int> predict_from_logits(const Eigen::MatrixXd& logits);
std::vector<int> predict(const ModelParams& params, const Eigen::MatrixXd& features);

// Binary parameter format: magic "SAFENET\0", u32 version, u32 feature_dim,
// u32 hidden1, u32 hidden2, u32 classes, then every tensor of ModelParams
// (including batch-norm running statistics) as little-endian float64 in
// declaration order, matrices row-major.
inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_model(std::ostream& out, const ModelParams& params);
ModelParams read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace safenet
