// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/model.hpp"

#include "safenet/random.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace safenet {

namespace {

std::span<double> view(Eigen::MatrixXd& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> view(Eigen::RowVectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

Linear make_linear(Index in, Index out, InitScheme scheme, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double w_std = scheme == InitScheme::paper ? 1.0 : 1.0 / std::sqrt(static_cast<double>(in));
    Linear l;
    l.weight.resize(in, out);
    for (Index i = 0; i < in; ++i)
        for (Index j = 0; j < out; ++j) l.weight(i, j) = w_std * normal(rng);
    l.bias.resize(out);
    for (Index j = 0; j < out; ++j) l.bias(j) = normal(rng);
    return l;
}

BatchNorm make_batch_norm(Index width) {
    return {{Eigen::RowVectorXd::Ones(width), Eigen::RowVectorXd::Zero(width)},
            Eigen::RowVectorXd::Zero(width),
            Eigen::RowVectorXd::Ones(width)};
}

Linear zeros_like(const Linear& l) {
    return {Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
            Eigen::RowVectorXd::Zero(l.bias.size())};
}

BatchNormAffine zeros_like(const BatchNormAffine& a) {
    return {Eigen::RowVectorXd::Zero(a.scale.size()), Eigen::RowVectorXd::Zero(a.shift.size())};
}

Eigen::MatrixXd affine(const Linear& l, const Eigen::MatrixXd& x) {
    return (x * l.weight).rowwise() + l.bias;
}

// Batch-norm + ReLU in training mode. Writes the normalized activations and
// inverse std into the cache slots and returns the ReLU output.
Eigen::MatrixXd bn_relu_train(BatchNorm& bn, const Eigen::MatrixXd& z, Eigen::MatrixXd& normalized,
                              Eigen::RowVectorXd& inv_std,
                              Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& active) {
    const double b = static_cast<double>(z.rows());
    const Eigen::RowVectorXd mean = z.colwise().mean();
    const Eigen::MatrixXd centered = z.rowwise() - mean;
    const Eigen::RowVectorXd var = centered.array().square().colwise().sum().matrix() / b;
    inv_std = (var.array() + kBatchNormEps).rsqrt().matrix();
    normalized = (centered.array().rowwise() * inv_std.array()).matrix();

    const double m = kBatchNormMomentum;
    bn.running_mean = (1.0 - m) * bn.running_mean + m * mean;
    bn.running_var = (1.0 - m) * bn.running_var + m * (var * (b / (b - 1.0)));

    const Eigen::MatrixXd y = (normalized.array().rowwise() * bn.affine.scale.array()).matrix()
                                  .rowwise() + bn.affine.shift;
    active = y.array() > 0.0;
    return y.cwiseMax(0.0);
}

Eigen::MatrixXd bn_relu_eval(const BatchNorm& bn, const Eigen::MatrixXd& z) {
    const Eigen::RowVectorXd inv_std = (bn.running_var.array() + kBatchNormEps).rsqrt().matrix();
    const Eigen::MatrixXd y =
        (((z.rowwise() - bn.running_mean).array().rowwise() * (inv_std.array() * bn.affine.scale.array()))
             .matrix())
            .rowwise() + bn.affine.shift;
    return y.cwiseMax(0.0);
}

// Gradient through ReLU(BN(z)) back to z, accumulating scale/shift grads.
Eigen::MatrixXd bn_relu_backward(const BatchNormAffine& affine_params, const Eigen::MatrixXd& grad_out,
                                 const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& active,
                                 const Eigen::MatrixXd& normalized, const Eigen::RowVectorXd& inv_std,
                                 BatchNormAffine& grad_affine) {
    const double b = static_cast<double>(grad_out.rows());
    const Eigen::MatrixXd dy = active.select(grad_out, 0.0);
    grad_affine.scale = (dy.array() * normalized.array()).colwise().sum().matrix();
    grad_affine.shift = dy.colwise().sum();
    const Eigen::MatrixXd dxhat = (dy.array().rowwise() * affine_params.scale.array()).matrix();
    const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
    const Eigen::RowVectorXd sum_dxhat_xhat = (dxhat.array() * normalized.array()).colwise().sum().matrix();
    Eigen::ArrayXXd dz = b * dxhat.array();
    dz.rowwise() -= sum_dxhat.array();
    dz -= normalized.array().rowwise() * sum_dxhat_xhat.array();
    dz.rowwise() *= inv_std.array() / b;
    return dz.matrix();
}

void check_input(const ModelParams& params, const Eigen::MatrixXd& batch) {
    if (batch.cols() != params.feature_dim())
        throw ModelError("forward: batch has " + std::to_string(batch.cols()) +
                         " features, model expects " + std::to_string(params.feature_dim()));
}

}  // namespace

bool ModelParams::all_finite() const {
    auto ok = [](const Linear& l) { return l.weight.allFinite() && l.bias.allFinite(); };
    auto ok_bn = [](const BatchNorm& b) {
        return b.affine.scale.allFinite() && b.affine.shift.allFinite() &&
               b.running_mean.allFinite() && b.running_var.allFinite();
    };
    return ok(fc1) && ok_bn(bn1) && ok(fc2) && ok_bn(bn2) && ok(fc3) && ok(head);
}

Gradients Gradients::zeros_like(const ModelParams& p) {
    return {safenet::zeros_like(p.fc1), safenet::zeros_like(p.bn1.affine),
            safenet::zeros_like(p.fc2), safenet::zeros_like(p.bn2.affine),
            safenet::zeros_like(p.fc3), safenet::zeros_like(p.head)};
}

bool Gradients::all_finite() const {
    auto ok = [](const Linear& l) { return l.weight.allFinite() && l.bias.allFinite(); };
    auto ok_bn = [](const BatchNormAffine& a) { return a.scale.allFinite() && a.shift.allFinite(); };
    return ok(fc1) && ok_bn(bn1) && ok(fc2) && ok_bn(bn2) && ok(fc3) && ok(head);
}

std::vector<TensorSlot> trainable_tensors(ModelParams& p) {
    return {{"fc1.weight", view(p.fc1.weight), true},   {"fc1.bias", view(p.fc1.bias), true},
            {"bn1.scale", view(p.bn1.affine.scale), false}, {"bn1.shift", view(p.bn1.affine.shift), false},
            {"fc2.weight", view(p.fc2.weight), true},   {"fc2.bias", view(p.fc2.bias), true},
            {"bn2.scale", view(p.bn2.affine.scale), false}, {"bn2.shift", view(p.bn2.affine.shift), false},
            {"fc3.weight", view(p.fc3.weight), true},   {"fc3.bias", view(p.fc3.bias), true},
            {"head.weight", view(p.head.weight), true}, {"head.bias", view(p.head.bias), true}};
}

std::vector<ConstTensorSlot> gradient_tensors(const Gradients& g) {
    auto mutable_slots = gradient_tensors(const_cast<Gradients&>(g));
    std::vector<ConstTensorSlot> out;
    out.reserve(mutable_slots.size());
    for (const auto& s : mutable_slots) out.push_back({s.name, s.data, s.decay});
    return out;
}

std::vector<TensorSlot> gradient_tensors(Gradients& g) {
    return {{"fc1.weight", view(g.fc1.weight), true},   {"fc1.bias", view(g.fc1.bias), true},
            {"bn1.scale", view(g.bn1.scale), false},    {"bn1.shift", view(g.bn1.shift), false},
            {"fc2.weight", view(g.fc2.weight), true},   {"fc2.bias", view(g.fc2.bias), true},
            {"bn2.scale", view(g.bn2.scale), false},    {"bn2.shift", view(g.bn2.shift), false},
            {"fc3.weight", view(g.fc3.weight), true},   {"fc3.bias", view(g.fc3.bias), true},
            {"head.weight", view(g.head.weight), true}, {"head.bias", view(g.head.bias), true}};
}

ModelParams init_params(std::uint64_t seed, InitScheme scheme, Index feature_dim) {
    if (feature_dim < 1) throw ModelError("init_params: feature_dim must be >= 1");
    Rng rng(derive_seed(seed, "init_params"));
    ModelParams p;
    p.fc1 = make_linear(feature_dim, kHidden1, scheme, rng);
    p.bn1 = make_batch_norm(kHidden1);
    p.fc2 = make_linear(kHidden1, kHidden2, scheme, rng);
    p.bn2 = make_batch_norm(kHidden2);
    p.fc3 = make_linear(kHidden2, kHidden2, scheme, rng);
    p.head = make_linear(kHidden2, kClasses, scheme, rng);
    return p;
}

TrainForward forward_train(ModelParams& params, const Eigen::MatrixXd& batch) {
    check_input(params, batch);
    if (batch.rows() < 2) throw ModelError("forward: training mode needs a batch of at least 2 rows");
    TrainForward out;
    auto& c = out.cache;
    c.input = batch;
    c.h1 = bn_relu_train(params.bn1, affine(params.fc1, batch), c.bn1_normalized, c.bn1_inv_std,
                         c.relu1_active);
    c.h2 = bn_relu_train(params.bn2, affine(params.fc2, c.h1), c.bn2_normalized, c.bn2_inv_std,
                         c.relu2_active);
    c.h3 = c.h2 + affine(params.fc3, c.h2);
    out.logits = affine(params.head, c.h3);
    return out;
}

Eigen::MatrixXd forward_eval(const ModelParams& params, const Eigen::MatrixXd& batch) {
    check_input(params, batch);
    const Eigen::MatrixXd h1 = bn_relu_eval(params.bn1, affine(params.fc1, batch));
    const Eigen::MatrixXd h2 = bn_relu_eval(params.bn2, affine(params.fc2, h1));
    const Eigen::MatrixXd h3 = h2 + affine(params.fc3, h2);
    return affine(params.head, h3);
}

LossResult cross_entropy(const Eigen::MatrixXd& logits, std::span<const int> labels) {
    if (static_cast<Index>(labels.size()) != logits.rows() || logits.cols() != kClasses)
        throw ModelError("cross_entropy: logits and labels disagree in shape");
    const Index b = logits.rows();
    LossResult out{0.0, Eigen::MatrixXd(b, logits.cols())};
    for (Index i = 0; i < b; ++i) {
        const double top = logits.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (logits.row(i).array() - top).exp().matrix();
        const double z = e.sum();
        const int y = labels[static_cast<std::size_t>(i)];
        out.loss += std::log(z) - (logits(i, y) - top);
        out.grad.row(i) = e / z;
        out.grad(i, y) -= 1.0;
    }
    out.loss /= static_cast<double>(b);
    out.grad /= static_cast<double>(b);
    return out;
}

Gradients backward(const ModelParams& params, const ForwardCache& c, const Eigen::MatrixXd& grad_logits) {
    if (grad_logits.rows() != c.batch() || grad_logits.cols() != params.head.weight.cols() ||
        c.input.cols() != params.feature_dim())
        throw ModelError("backward: cache and upstream gradient do not match");
    Gradients g;
    g.head.weight = c.h3.transpose() * grad_logits;
    g.head.bias = grad_logits.colwise().sum();
    const Eigen::MatrixXd dh3 = grad_logits * params.head.weight.transpose();

    // h3 = h2 + fc3(h2): the gradient reaches h2 both directly and via fc3.
    g.fc3.weight = c.h2.transpose() * dh3;
    g.fc3.bias = dh3.colwise().sum();
    const Eigen::MatrixXd dh2 = dh3 + dh3 * params.fc3.weight.transpose();

    const Eigen::MatrixXd dz2 = bn_relu_backward(params.bn2.affine, dh2, c.relu2_active,
                                                 c.bn2_normalized, c.bn2_inv_std, g.bn2);
    g.fc2.weight = c.h1.transpose() * dz2;
    g.fc2.bias = dz2.colwise().sum();
    const Eigen::MatrixXd dh1 = dz2 * params.fc2.weight.transpose();

    const Eigen::MatrixXd dz1 = bn_relu_backward(params.bn1.affine, dh1, c.relu1_active,
                                                 c.bn1_normalized, c.bn1_inv_std, g.bn1);
    g.fc1.weight = c.input.transpose() * dz1;
    g.fc1.bias = dz1.colwise().sum();
    return g;
}

std::vector<int> predict_from_logits(const Eigen::MatrixXd& logits) {
    std::vector<int> out(static_cast<std::size_t>(logits.rows()));
    for (Index i = 0; i < logits.rows(); ++i)
        out[static_cast<std::size_t>(i)] = logits(i, 1) > logits(i, 0) ? 1 : 0;
    return out;
}

std::vector<int> predict(const ModelParams& params, const Eigen::MatrixXd& features) {
    if (features.rows() == 0) return {};
    return predict_from_logits(forward_eval(params, features));
}

// ---- serialization -------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

constexpr std::array<char, 8> kMagic = {'S', 'A', 'F', 'E', 'N', 'E', 'T', '\0'};

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), 4)) throw ModelError("model file truncated in header");
    return v;
}

template <class Derived>
void put_tensor(std::ostream& out, const Eigen::MatrixBase<Derived>& m) {
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
}

template <class Derived>
void get_tensor(std::istream& in, Eigen::MatrixBase<Derived>& m) {
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            double v = 0.0;
            if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
                throw ModelError("model file truncated in parameter data");
            m(i, j) = v;
        }
}

void put_linear(std::ostream& out, const Linear& l) {
    put_tensor(out, l.weight);
    put_tensor(out, l.bias);
}

void put_bn(std::ostream& out, const BatchNorm& b) {
    put_tensor(out, b.affine.scale);
    put_tensor(out, b.affine.shift);
    put_tensor(out, b.running_mean);
    put_tensor(out, b.running_var);
}

void get_linear(std::istream& in, Linear& l, Index rows, Index cols) {
    l.weight.resize(rows, cols);
    l.bias.resize(cols);
    get_tensor(in, l.weight);
    get_tensor(in, l.bias);
}

void get_bn(std::istream& in, BatchNorm& b, Index width) {
    for (auto* v : {&b.affine.scale, &b.affine.shift, &b.running_mean, &b.running_var}) {
        v->resize(width);
        get_tensor(in, *v);
    }
}

}  // namespace

void write_model(std::ostream& out, const ModelParams& p) {
    out.write(kMagic.data(), kMagic.size());
    put_u32(out, kModelFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(p.feature_dim()));
    put_u32(out, static_cast<std::uint32_t>(p.fc1.weight.cols()));
    put_u32(out, static_cast<std::uint32_t>(p.fc2.weight.cols()));
    put_u32(out, static_cast<std::uint32_t>(p.head.weight.cols()));
    put_linear(out, p.fc1);
    put_bn(out, p.bn1);
    put_linear(out, p.fc2);
    put_bn(out, p.bn2);
    put_linear(out, p.fc3);
    put_linear(out, p.head);
}

ModelParams read_model(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic)
        throw ModelError("not a SafeNet model file (bad magic)");
    const auto version = get_u32(in);
    if (version != kModelFormatVersion)
        throw ModelError("unsupported model format version " + std::to_string(version));
    const Index dim = get_u32(in);
    const Index h1 = get_u32(in);
    const Index h2 = get_u32(in);
    const Index classes = get_u32(in);
    if (dim < 1 || h1 != kHidden1 || h2 != kHidden2 || classes != kClasses)
        throw ModelError("model file layer sizes do not match the SafeNet architecture");
    ModelParams p;
    get_linear(in, p.fc1, dim, h1);
    get_bn(in, p.bn1, h1);
    get_linear(in, p.fc2, h1, h2);
    get_bn(in, p.bn2, h2);
    get_linear(in, p.fc3, h2, h2);
    get_linear(in, p.head, h2, classes);
    if (in.peek() != std::char_traits<char>::eof()) throw ModelError("trailing bytes after model data");
    return p;
}

void save_model(const std::filesystem::path& path, const ModelParams& params) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write '" + path.string() + "'");
    write_model(out, params);
    if (!out) throw ModelError("write failed for '" + path.string() + "'");
}

ModelParams load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open '" + path.string() + "'");
    return read_model(in);
}

}  // namespace safenet
