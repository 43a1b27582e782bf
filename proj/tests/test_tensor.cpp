// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "lhnn/error.hpp"
#include "lhnn/random.hpp"
#include "lhnn/tensor.hpp"

namespace lhnn {
namespace {

using ad::Tape;
using ad::Tensor;

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double lo = -1, double hi = 1) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

using Fn = std::function<Tensor(Tape&, std::vector<Tensor>&)>;

// Central differences on every entry of every input.
void check_gradients(const Fn& fn, std::vector<Matrix> inits, double tol = 1e-6) {
  std::vector<Tensor> params;
  for (auto& m : inits) params.push_back(Tensor::parameter(m));
  Tape tape;
  tape.backward(fn(tape, params));
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (Eigen::Index k = 0; k < inits[p].size(); ++k) {
      auto eval = [&](double delta) {
        std::vector<Tensor> shifted;
        for (std::size_t q = 0; q < inits.size(); ++q) {
          Matrix m = inits[q];
          if (q == p) m.data()[k] += delta;
          shifted.push_back(Tensor::constant(m));
        }
        Tape t;
        return fn(t, shifted).scalar();
      };
      const double h = 1e-6;
      const double fd = (eval(h) - eval(-h)) / (2 * h);
      const double got = params[p].has_grad() && params[p].grad().size() ? params[p].grad().data()[k] : 0.0;
      EXPECT_NEAR(got, fd, tol * std::max(1.0, std::abs(fd))) << "input " << p << " entry " << k;
    }
  }
}

// Contracts an op's output with fixed weights so every entry gets a distinct upstream gradient.
Tensor contract(Tape& t, const Tensor& x, std::uint64_t seed) {
  Rng rng(seed);
  return ad::sum(t, ad::mul(t, x, Tensor::constant(random_matrix(rng, x.rows(), x.cols()))));
}

TEST(Tensor, MatmulAndLinear) {
  Rng rng(1);
  check_gradients([](Tape& t, auto& p) { return contract(t, ad::matmul(t, p[0], p[1]), 9); },
                  {random_matrix(rng, 3, 4), random_matrix(rng, 4, 2)});
  check_gradients([](Tape& t, auto& p) { return contract(t, ad::linear(t, p[0], p[1], p[2]), 9); },
                  {random_matrix(rng, 5, 3), random_matrix(rng, 3, 2), random_matrix(rng, 1, 2)});
  check_gradients([](Tape& t, auto& p) { return contract(t, ad::add_bias(t, p[0], p[1]), 2); },
                  {random_matrix(rng, 4, 3), random_matrix(rng, 1, 3)});
}

TEST(Tensor, Elementwise) {
  Rng rng(2);
  const std::vector<Matrix> ab{random_matrix(rng, 3, 3), random_matrix(rng, 3, 3)};
  check_gradients([](Tape& t, auto& p) { return contract(t, ad::add(t, p[0], p[1]), 1); }, ab);
  check_gradients([](Tape& t, auto& p) { return contract(t, ad::sub(t, p[0], p[1]), 1); }, ab);
  check_gradients([](Tape& t, auto& p) { return contract(t, ad::mul(t, p[0], p[1]), 1); }, ab);
  check_gradients([](Tape& t, auto& p) { return contract(t, ad::sigmoid(t, p[0]), 3); }, {ab[0]});
  check_gradients([](Tape& t, auto& p) { return contract(t, ad::scale(t, p[0], -2.5), 3); }, {ab[0]});
  check_gradients([](Tape& t, auto& p) { return ad::mean(t, p[0]); }, {ab[0]});
  check_gradients([](Tape& t, auto& p) { return contract(t, ad::concat_cols(t, p[0], p[1]), 4); },
                  {random_matrix(rng, 3, 2), random_matrix(rng, 3, 4)});
}

TEST(Tensor, ReluAwayFromKink) {
  Rng rng(3);
  Matrix x = random_matrix(rng, 4, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x.data()[i]) < 0.05) x.data()[i] = 0.3;
  }
  check_gradients([](Tape& t, auto& p) { return contract(t, ad::relu(t, p[0]), 5); }, {x});
}

TEST(Tensor, Spmm) {
  Rng rng(4);
  const SparseMatrix s = SparseMatrix::from_triplets(3, 4, {{0, 1, 2.0}, {0, 3, -1.0}, {2, 0, 0.5}, {2, 2, 1.5}});
  check_gradients([&s](Tape& t, auto& p) { return contract(t, ad::spmm(t, s, p[0]), 6); }, {random_matrix(rng, 4, 2)});
  Tape t;
  const Tensor y = ad::spmm(t, s, Tensor::constant(Matrix::Ones(4, 1)));
  EXPECT_EQ(y.value()(0, 0), 1.0);
  EXPECT_EQ(y.value()(1, 0), 0.0);
  EXPECT_EQ(y.value()(2, 0), 2.0);
}

TEST(Tensor, LossesHaveAnalyticGradients) {
  Rng rng(5);
  const Matrix target = random_matrix(rng, 4, 2);
  check_gradients([&](Tape& t, auto& p) { return ad::mse(t, p[0], target); }, {random_matrix(rng, 4, 2)});
  Matrix labels(4, 2);
  labels << 0, 1, 1, 0, 0, 0, 1, 1;
  check_gradients([&](Tape& t, auto& p) { return ad::weighted_bce(t, ad::sigmoid(t, p[0]), labels, 0.7); },
                  {random_matrix(rng, 4, 2, -3, 3)});
}

TEST(Tensor, WeightedBceValues) {
  Tape t;
  const Tensor half = Tensor::constant(Matrix::Constant(1, 1, 0.5));
  EXPECT_NEAR(ad::weighted_bce(t, half, Matrix::Zero(1, 1), 0.7).scalar(), 0.7 * std::log(2.0), 1e-12);
  EXPECT_NEAR(ad::weighted_bce(t, half, Matrix::Ones(1, 1), 0.7).scalar(), std::log(2.0), 1e-12);
  EXPECT_NEAR(ad::weighted_bce(t, half, Matrix::Ones(1, 1), 0.2).scalar(), std::log(2.0), 1e-12);

  // gamma = 1 against a plain BCE written out here
  Matrix c(1, 3), y(1, 3);
  c << 0.2, 0.7, 0.9;
  y << 0, 1, 0;
  const double plain = -(std::log(0.8) + std::log(0.7) + std::log(0.1)) / 3.0;
  EXPECT_NEAR(ad::weighted_bce(t, Tensor::constant(c), y, 1.0).scalar(), plain, 1e-12);

  // certain and wrong: log clamp keeps it finite
  EXPECT_NEAR(ad::weighted_bce(t, Tensor::constant(Matrix::Zero(1, 1)), Matrix::Ones(1, 1), 0.7).scalar(),
              -std::log(1e-12), 1e-9);
  EXPECT_THROW(ad::weighted_bce(t, half, Matrix::Constant(1, 1, 0.5), 0.7), ConfigError);
  EXPECT_THROW(ad::weighted_bce(t, half, Matrix::Zero(1, 1), 0.0), ConfigError);
}

TEST(Tensor, ShapeErrors) {
  Tape t;
  EXPECT_THROW(ad::matmul(t, Tensor::zeros(2, 3), Tensor::zeros(2, 3)), ShapeError);
  EXPECT_THROW(ad::add(t, Tensor::zeros(2, 3), Tensor::zeros(3, 2)), ShapeError);
  EXPECT_THROW(ad::concat_cols(t, Tensor::zeros(2, 3), Tensor::zeros(3, 3)), ShapeError);
}

TEST(Tensor, BackwardPreconditions) {
  Tape t;
  Tensor p = Tensor::parameter(Matrix::Ones(2, 2));
  const Tensor y = ad::scale(t, p, 2.0);
  EXPECT_THROW(t.backward(y), Error);  // not a scalar
  Tape other;
  const Tensor foreign = ad::sum(other, p);
  EXPECT_THROW(t.backward(foreign), Error);
  const Tensor c = ad::sum(t, Tensor::constant(Matrix::Ones(2, 2)));
  EXPECT_THROW(t.backward(c), Error);  // nothing to differentiate
}

TEST(Tensor, GradientsAccumulateAcrossUses) {
  Tape t;
  Tensor p = Tensor::parameter(Matrix::Constant(1, 1, 3.0));
  t.backward(ad::sum(t, ad::mul(t, p, p)));
  EXPECT_EQ(p.grad()(0, 0), 6.0);
}

TEST(Adam, FirstStepsByHand) {
  Matrix w = Matrix::Constant(1, 1, 1.0);
  Matrix g = Matrix::Constant(1, 1, 0.5);
  Matrix* params[] = {&w};
  const Matrix* grads[] = {&g};
  ad::AdamState st;
  ad::adam_step(params, grads, st, 0.1);
  // m = 0.05, v = 2.5e-4; bias-corrected 0.5 and 0.25
  EXPECT_NEAR(w(0, 0), 1.0 - 0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  g(0, 0) = -1.0;
  ad::adam_step(params, grads, st, 0.1);
  const double m = 0.9 * 0.05 + 0.1 * -1.0;
  const double v = 0.999 * 2.5e-4 + 0.001 * 1.0;
  const double mh = m / (1 - 0.81);
  const double vh = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(w(0, 0), 1.0 - 0.1 * 0.5 / (0.5 + 1e-8) - 0.1 * mh / (std::sqrt(vh) + 1e-8), 1e-12);
  EXPECT_EQ(st.step, 2u);
}

TEST(Adam, MinimizesQuadratic) {
  ad::ParameterSet ps;
  Tensor& x = ps.add("x", Matrix::Constant(1, 2, 4.0));
  ad::Adam opt(ps);
  for (int i = 0; i < 2000; ++i) {
    Tape t;
    ps.zero_grad();
    t.backward(ad::mse(t, x, Matrix::Constant(1, 2, -1.0)));
    opt.step(0.05);
  }
  EXPECT_NEAR(x.value()(0, 0), -1.0, 1e-3);
  EXPECT_EQ(ps.scalar_count(), 2u);
  EXPECT_THROW(ps.at("missing"), Error);
}

}  // namespace
}  // namespace lhnn
