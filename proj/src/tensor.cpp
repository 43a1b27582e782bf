// SPDX-License-Identifier: Apache-2.0

#include "lhnn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "lhnn/error.hpp"

namespace lhnn::ad {

namespace {

std::string shape_of(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_of(a.value()) + " vs " + shape_of(b.value()));
  }
}

}  // namespace

Tensor Tensor::constant(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Eigen::Index rows, Eigen::Index cols) { return constant(Matrix::Zero(rows, cols)); }

double Tensor::scalar() const {
  if (rows() != 1 || cols() != 1) throw ShapeError("scalar(): tensor is " + shape_of(value()));
  return value()(0, 0);
}

void accumulate_grad(Node& node, const Matrix& delta) {
  if (!node.requires_grad) return;
  if (node.grad.size() == 0) {
    node.grad = delta;
  } else {
    node.grad += delta;
  }
}

Tensor Tape::record(Matrix value, std::initializer_list<const Tensor*> inputs, Backward backward) {
#ifndef NDEBUG
  if (!value.allFinite()) throw DivergenceError("non-finite value produced by a tensor op");
#endif
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->tape = this;
  for (const Tensor* in : inputs) node->requires_grad = node->requires_grad || in->requires_grad();
  if (node->requires_grad) entries_.push_back({node, std::move(backward)});
  return Tensor(std::move(node));
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.node()->tape != this) {
    throw Error("backward: loss was not produced by this tape");
  }
  if (loss.rows() != 1 || loss.cols() != 1) throw ShapeError("backward: loss must be 1x1");
  if (!loss.requires_grad()) throw Error("backward: loss does not depend on any parameter");
  accumulate_grad(*loss.node(), Matrix::Ones(1, 1));
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->output->grad.size() == 0) continue;
    it->backward(it->output->grad);
  }
}

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_of(a.value()) + " * " + shape_of(b.value()));
  }
  auto an = a.node();
  auto bn = b.node();
  return tape.record(a.value() * b.value(), {&a, &b}, [an, bn](const Matrix& g) {
    if (an->requires_grad) accumulate_grad(*an, g * bn->value.transpose());
    if (bn->requires_grad) accumulate_grad(*bn, an->value.transpose() * g);
  });
}

Tensor spmm(Tape& tape, const SparseMatrix& s, const Tensor& x) {
  if (static_cast<Eigen::Index>(s.cols()) != x.rows()) {
    throw ShapeError("spmm: " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) + " * " +
                     shape_of(x.value()));
  }
  const Matrix& xv = x.value();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(s.rows()), xv.cols());
  for (std::size_t r = 0; r < s.rows(); ++r) {
    const auto cols = s.row_cols(r);
    const auto vals = s.row_values(r);
    auto out_row = out.row(static_cast<Eigen::Index>(r));
    for (std::size_t k = 0; k < cols.size(); ++k) out_row += vals[k] * xv.row(static_cast<Eigen::Index>(cols[k]));
  }
  auto xn = x.node();
  const SparseMatrix* sp = &s;
  return tape.record(std::move(out), {&x}, [xn, sp](const Matrix& g) {
    Matrix dx = Matrix::Zero(xn->value.rows(), xn->value.cols());
    for (std::size_t r = 0; r < sp->rows(); ++r) {
      const auto cols = sp->row_cols(r);
      const auto vals = sp->row_values(r);
      const auto g_row = g.row(static_cast<Eigen::Index>(r));
      for (std::size_t k = 0; k < cols.size(); ++k) dx.row(static_cast<Eigen::Index>(cols[k])) += vals[k] * g_row;
    }
    accumulate_grad(*xn, dx);
  });
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto an = a.node();
  auto bn = b.node();
  return tape.record(a.value() + b.value(), {&a, &b}, [an, bn](const Matrix& g) {
    accumulate_grad(*an, g);
    accumulate_grad(*bn, g);
  });
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto an = a.node();
  auto bn = b.node();
  return tape.record(a.value() - b.value(), {&a, &b}, [an, bn](const Matrix& g) {
    accumulate_grad(*an, g);
    if (bn->requires_grad) accumulate_grad(*bn, -g);
  });
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto an = a.node();
  auto bn = b.node();
  return tape.record(a.value().cwiseProduct(b.value()), {&a, &b}, [an, bn](const Matrix& g) {
    if (an->requires_grad) accumulate_grad(*an, g.cwiseProduct(bn->value));
    if (bn->requires_grad) accumulate_grad(*bn, g.cwiseProduct(an->value));
  });
}

Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) {
    throw ShapeError("add_bias: bias " + shape_of(bias.value()) + " for input " + shape_of(x.value()));
  }
  Matrix out = x.value();
  out.rowwise() += bias.value().row(0);
  auto xn = x.node();
  auto bn = bias.node();
  return tape.record(std::move(out), {&x, &bias}, [xn, bn](const Matrix& g) {
    accumulate_grad(*xn, g);
    if (bn->requires_grad) accumulate_grad(*bn, g.colwise().sum());
  });
}

Tensor linear(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.cols() != weight.rows() || bias.rows() != 1 || bias.cols() != weight.cols()) {
    throw ShapeError("linear: input " + shape_of(x.value()) + ", weight " + shape_of(weight.value()) + ", bias " +
                     shape_of(bias.value()));
  }
  Matrix out = x.value() * weight.value();
  out.rowwise() += bias.value().row(0);
  auto xn = x.node();
  auto wn = weight.node();
  auto bn = bias.node();
  return tape.record(std::move(out), {&x, &weight, &bias}, [xn, wn, bn](const Matrix& g) {
    if (xn->requires_grad) accumulate_grad(*xn, g * wn->value.transpose());
    if (wn->requires_grad) accumulate_grad(*wn, xn->value.transpose() * g);
    if (bn->requires_grad) accumulate_grad(*bn, g.colwise().sum());
  });
}

Tensor concat_cols(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("concat_cols: " + shape_of(a.value()) + " | " + shape_of(b.value()));
  }
  Matrix out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a.value();
  out.rightCols(b.cols()) = b.value();
  auto an = a.node();
  auto bn = b.node();
  const Eigen::Index split = a.cols();
  return tape.record(std::move(out), {&a, &b}, [an, bn, split](const Matrix& g) {
    if (an->requires_grad) accumulate_grad(*an, g.leftCols(split));
    if (bn->requires_grad) accumulate_grad(*bn, g.rightCols(g.cols() - split));
  });
}

Tensor relu(Tape& tape, const Tensor& x) {
  auto xn = x.node();
  return tape.record(x.value().cwiseMax(0.0), {&x}, [xn](const Matrix& g) {
    accumulate_grad(*xn, (xn->value.array() > 0.0).select(g, 0.0));
  });
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
  Matrix out = x.value().unaryExpr([](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  auto xn = x.node();
  auto y = std::make_shared<Matrix>(out);
  return tape.record(std::move(out), {&x}, [xn, y](const Matrix& g) {
    accumulate_grad(*xn, g.cwiseProduct(y->cwiseProduct((1.0 - y->array()).matrix())));
  });
}

Tensor scale(Tape& tape, const Tensor& x, double factor) {
  auto xn = x.node();
  return tape.record(x.value() * factor, {&x}, [xn, factor](const Matrix& g) { accumulate_grad(*xn, g * factor); });
}

Tensor sum(Tape& tape, const Tensor& x) {
  auto xn = x.node();
  return tape.record(Matrix::Constant(1, 1, x.value().sum()), {&x}, [xn](const Matrix& g) {
    accumulate_grad(*xn, Matrix::Constant(xn->value.rows(), xn->value.cols(), g(0, 0)));
  });
}

Tensor mean(Tape& tape, const Tensor& x) {
  const double n = static_cast<double>(x.value().size());
  if (n == 0.0) throw ShapeError("mean of an empty tensor");
  return scale(tape, sum(tape, x), 1.0 / n);
}

Tensor mse(Tape& tape, const Tensor& prediction, const Matrix& target) {
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols()) {
    throw ShapeError("mse: prediction " + shape_of(prediction.value()) + ", target " + shape_of(target));
  }
  const double n = static_cast<double>(target.size());
  if (n == 0.0) throw ShapeError("mse over an empty tensor");
  const Matrix diff = prediction.value() - target;
  auto pn = prediction.node();
  auto d = std::make_shared<Matrix>(diff);
  return tape.record(Matrix::Constant(1, 1, diff.squaredNorm() / n), {&prediction}, [pn, d, n](const Matrix& g) {
    accumulate_grad(*pn, *d * (2.0 * g(0, 0) / n));
  });
}

Tensor weighted_bce(Tape& tape, const Tensor& probability, const Matrix& labels, double gamma) {
  if (probability.rows() != labels.rows() || probability.cols() != labels.cols()) {
    throw ShapeError("weighted_bce: prediction " + shape_of(probability.value()) + ", labels " + shape_of(labels));
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  const double n = static_cast<double>(labels.size());
  if (n == 0.0) throw ShapeError("weighted_bce over an empty tensor");
  const Matrix& c = probability.value();
  Matrix dloss(c.rows(), c.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      const double y = labels(i, j);
      if (y != 0.0 && y != 1.0) throw ConfigError("classification labels must be 0 or 1");
      const double w = (1.0 - y) * gamma + y;
      const double p = c(i, j);
      const double q = 1.0 - p;
      const double lp = std::max(p, kLogClamp);
      const double lq = std::max(q, kLogClamp);
      total += w * (y * std::log(lp) + (1.0 - y) * std::log(lq));
      // d/dp of -w [y log p + (1 - y) log(1 - p)]; zero where the clamp is active.
      double d = 0.0;
      if (y == 1.0 && p > kLogClamp) d = -w / p;
      if (y == 0.0 && q > kLogClamp) d = w / q;
      dloss(i, j) = d / n;
    }
  }
  auto pn = probability.node();
  auto dl = std::make_shared<Matrix>(std::move(dloss));
  return tape.record(Matrix::Constant(1, 1, -total / n), {&probability},
                     [pn, dl](const Matrix& g) { accumulate_grad(*pn, *dl * g(0, 0)); });
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads, AdamState& state,
               double learning_rate, const AdamOptions& options) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: params/grads count mismatch");
  if (state.first_moment.empty()) {
    for (const Matrix* p : params) {
      state.first_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.second_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (state.first_moment.size() != params.size()) throw ShapeError("adam_step: state does not match params");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(options.beta1, t);
  const double correction2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& g = *grads[i];
    if (g.rows() != p.rows() || g.cols() != p.cols()) throw ShapeError("adam_step: gradient shape mismatch");
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = options.beta1 * m + (1.0 - options.beta1) * g;
    v = options.beta2 * v + (1.0 - options.beta2) * g.cwiseProduct(g);
    p.array() -= learning_rate * (m.array() / correction1) /
                 ((v.array() / correction2).sqrt() + options.epsilon);
  }
}

Tensor& ParameterSet::add(std::string name, Matrix init) {
  if (contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  items_.emplace_back(std::move(name), Tensor::parameter(std::move(init)));
  return items_.back().second;
}

Tensor& ParameterSet::at(std::string_view name) {
  for (auto& [n, t] : items_) {
    if (n == name) return t;
  }
  throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

const Tensor& ParameterSet::at(std::string_view name) const {
  return const_cast<ParameterSet*>(this)->at(name);
}

bool ParameterSet::contains(std::string_view name) const {
  return std::any_of(items_.begin(), items_.end(), [&](const auto& item) { return item.first == name; });
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : items_) n += static_cast<std::size_t>(t.value().size());
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [name, t] : items_) t.zero_grad();
}

Adam::Adam(ParameterSet& params, AdamOptions options) : params_(&params), options_(options) {}

void Adam::step(double learning_rate) {
  std::vector<Matrix*> values;
  std::vector<Matrix> zero_grads;
  std::vector<const Matrix*> grads;
  values.reserve(params_->size());
  zero_grads.reserve(params_->size());
  for (const auto& [name, t] : params_->items()) {
    Tensor handle = t;
    values.push_back(&handle.mutable_value());
    if (t.grad().size() == 0) {
      zero_grads.push_back(Matrix::Zero(t.rows(), t.cols()));
      grads.push_back(&zero_grads.back());
    } else {
      grads.push_back(&t.grad());
    }
  }
  adam_step(values, grads, state_, learning_rate, options_);
}

}  // namespace lhnn::ad
