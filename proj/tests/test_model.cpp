// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/model.hpp"

#include "gradcheck.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace safenet;

namespace {

Eigen::MatrixXd random_batch(Index rows, std::uint64_t seed, Index dim = kSurveyItems) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(rows, dim);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    return x;
}

std::vector<int> alternating(Index n) {
    std::vector<int> y(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 2);
    return y;
}

double sample_std(const Eigen::MatrixXd& m) {
    const double mean = m.mean();
    return std::sqrt((m.array() - mean).square().sum() / static_cast<double>(m.size() - 1));
}

}  // namespace

TEST_CASE("init_params draws standard-normal weights and neutral batch norms") {
    const auto p = init_params(3);
    CHECK(p.fc2.weight.size() == 8192);
    CHECK(std::abs(sample_std(p.fc2.weight) - 1.0) < 0.05);
    CHECK(p.bn1.running_var.isOnes());
    CHECK(p.bn2.running_var.isOnes());
    CHECK(p.bn1.running_mean.isZero());
    CHECK(p.bn1.affine.scale.isOnes());
    CHECK(p.bn2.affine.shift.isZero());
    CHECK(testing::same_params(p, init_params(3)));
    CHECK_FALSE(testing::same_params(p, init_params(4)));

    const auto s = init_params(3, InitScheme::scaled);
    CHECK(std::abs(sample_std(s.fc3.weight) * std::sqrt(128.0) - 1.0) < 0.05);
}

TEST_CASE("forward shapes and eval determinism") {
    auto p = init_params(1);
    const auto x = random_batch(7, 2);
    const auto a = forward_eval(p, x);
    CHECK(a.rows() == 7);
    CHECK(a.cols() == 2);
    CHECK(a == forward_eval(p, x));
    CHECK(forward_train(p, x).logits.rows() == 7);
}

TEST_CASE("a zero head gives zero logits") {
    auto p = init_params(5);
    p.head.weight.setZero();
    p.head.bias.setZero();
    CHECK(forward_eval(p, random_batch(9, 1)).isZero());
    CHECK(forward_train(p, random_batch(9, 1)).logits.isZero());
}

TEST_CASE("zero residual weights reduce the block to the identity") {
    auto p = init_params(6);
    p.fc3.weight.setZero();
    p.fc3.bias.setZero();
    const auto x = random_batch(10, 4);
    auto fwd = forward_train(p, x);
    CHECK(fwd.cache.h3 == fwd.cache.h2);
    // the same network without the residual block: head applied to h2
    const Eigen::MatrixXd expected = (fwd.cache.h2 * p.head.weight).rowwise() + p.head.bias;
    CHECK(fwd.logits == expected);
}

TEST_CASE("training-mode passes pull running statistics toward the batch") {
    auto p = init_params(8);
    const auto x = random_batch(16, 3);
    const Eigen::RowVectorXd mean = ((x * p.fc1.weight).rowwise() + p.fc1.bias).colwise().mean();
    double previous = (p.bn1.running_mean - mean).norm();
    for (int i = 0; i < 30; ++i) {
        forward_train(p, x);
        const double gap = (p.bn1.running_mean - mean).norm();
        CHECK(gap == doctest::Approx(0.9 * previous).epsilon(1e-9));
        previous = gap;
    }
}

TEST_CASE("running variance uses the unbiased batch variance") {
    auto p = init_params(2);
    const auto x = random_batch(5, 9);
    const Eigen::MatrixXd z = (x * p.fc1.weight).rowwise() + p.fc1.bias;
    const Eigen::RowVectorXd mean = z.colwise().mean();
    const Eigen::RowVectorXd var = (z.rowwise() - mean).array().square().colwise().sum() / 4.0;
    forward_train(p, x);
    const Eigen::RowVectorXd expected = 0.9 * Eigen::RowVectorXd::Ones(64) + 0.1 * var;
    CHECK((p.bn1.running_var - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("forward_train rejects a single-row batch") {
    auto p = init_params(1);
    CHECK_THROWS_AS(forward_train(p, random_batch(1, 1)), ModelError);
    CHECK_THROWS_AS(forward_eval(p, random_batch(3, 1, 41)), ModelError);
}

TEST_CASE("cross entropy values and gradient structure") {
    Eigen::MatrixXd uniform(2, 2);
    uniform << 0, 0, 0, 0;
    const std::vector<int> y01 = {0, 1};
    CHECK(cross_entropy(uniform, y01).loss == doctest::Approx(0.693147).epsilon(1e-6));

    Eigen::MatrixXd confident(1, 2);
    confident << 10, -10;
    const std::vector<int> y0 = {0};
    // log(1 + e^-20)
    CHECK(cross_entropy(confident, y0).loss == doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-9));
    CHECK(std::abs(cross_entropy(confident, y0).loss - 2.061e-9) < 1e-12);

    const Eigen::MatrixXd logits = random_batch(12, 3, 2) * 5.0;
    const auto r = cross_entropy(logits, alternating(12));
    CHECK(r.grad.rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
    CHECK(r.loss >= 0.0);

    Eigen::MatrixXd shifted = logits;
    std::mt19937_64 rng(1);
    for (Index i = 0; i < shifted.rows(); ++i) shifted.row(i).array() += std::normal_distribution<double>(0, 50)(rng);
    CHECK(std::abs(cross_entropy(shifted, alternating(12)).loss - r.loss) < 1e-12);
}

TEST_CASE("backward of a zero upstream gradient is zero") {
    auto p = init_params(4);
    auto fwd = forward_train(p, random_batch(6, 5));
    const auto g = backward(p, fwd.cache, Eigen::MatrixXd::Zero(6, 2));
    auto& mg = const_cast<Gradients&>(g);
    for (const auto& t : gradient_tensors(mg))
        for (double v : t.data) CHECK(v == 0.0);
}

TEST_CASE("a zero head blocks every upstream gradient") {
    auto p = init_params(4);
    p.head.weight.setZero();
    auto fwd = forward_train(p, random_batch(6, 5));
    const auto g = backward(p, fwd.cache, random_batch(6, 7, 2));
    CHECK(g.fc1.weight.isZero());
    CHECK(g.fc1.bias.isZero());
    CHECK(g.fc3.weight.isZero());
    CHECK_FALSE(g.head.bias.isZero());
}

TEST_CASE("analytic gradients match central finite differences") {
    for (int draw = 0; draw < 6; ++draw) {
        const Index batch = 4 + 3 * draw % 13;
        const auto p = init_params(50 + draw, draw % 2 ? InitScheme::scaled : InitScheme::paper);
        const auto x = random_batch(batch, 90 + draw);
        const auto r = testing::check_gradients(p, x, alternating(batch), draw);
        INFO("draw " << draw << ": worst tensor " << r.worst_tensor);
        CHECK(r.max_rel_error < 1e-4);
        CHECK(r.pre_norm_bias_grad < 1e-12);
        CHECK(r.checked > 200);
    }
}

TEST_CASE("predict takes the argmax and sends ties to 0") {
    Eigen::MatrixXd logits(3, 2);
    logits << 2, 1, 1, 1, 0.5, 3;
    CHECK(predict_from_logits(logits) == std::vector<int>{0, 0, 1});
    const Eigen::MatrixXd shifted = logits.array() + 123.25;
    CHECK(predict_from_logits(shifted) == predict_from_logits(logits));
}

TEST_CASE("model files round-trip bit-exactly") {
    auto p = init_params(12, InitScheme::scaled, 10);
    forward_train(p, random_batch(8, 1, 10));  // non-trivial running statistics
    std::stringstream buf;
    write_model(buf, p);
    const auto back = read_model(buf);
    CHECK(testing::same_params(p, back));
    CHECK(back.feature_dim() == 10);
}

TEST_CASE("model files are validated on read") {
    std::stringstream buf;
    write_model(buf, init_params(1));
    const std::string bytes = buf.str();

    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_model(truncated), ModelError);
    std::stringstream trailing(bytes + "x");
    CHECK_THROWS_AS(read_model(trailing), ModelError);
    std::string bad = bytes;
    bad[0] = 'X';
    std::stringstream magic(bad);
    CHECK_THROWS_AS(read_model(magic), ModelError);
}
