// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lhnn/matrix.hpp"
#include "lhnn/sparse.hpp"

namespace lhnn::ad {

class Tape;

struct Node {
  Matrix value;
  Matrix grad;  // empty until a gradient reaches this node
  bool requires_grad = false;
  const Tape* tape = nullptr;  // producing tape; null for leaves
};

/// Shared handle to a dense value with an optional gradient accumulator.
/// Copies alias the same node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Matrix value);
  static Tensor parameter(Matrix value);
  static Tensor zeros(Eigen::Index rows, Eigen::Index cols);

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  bool has_grad() const { return node_->grad.size() != 0 || node_->value.size() == 0; }
  bool requires_grad() const { return node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double scalar() const;

  void zero_grad() { node_->grad.resize(0, 0); }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  friend class Tape;

  std::shared_ptr<Node> node_;
};

/// Ordered record of executed operations. Tensors produced through a tape can
/// be differentiated with backward(); the tape must outlive that call, and so
/// must any SparseMatrix passed to spmm.
class Tape {
 public:
  using Backward = std::function<void(const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Registers an op output. `backward` is only kept when an input needs gradients.
  Tensor record(Matrix value, std::initializer_list<const Tensor*> inputs, Backward backward);

  /// Seeds d(loss)/d(loss) = 1 and replays the recorded ops in reverse.
  void backward(const Tensor& loss);

  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::shared_ptr<Node> output;
    Backward backward;
  };
  std::vector<Entry> entries_;
};

/// Adds `delta` into the gradient of `node` if it requires one.
void accumulate_grad(Node& node, const Matrix& delta);

// Differentiable operations. Shapes follow the usual matrix conventions; a
// ShapeError is raised on mismatch.
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor spmm(Tape& tape, const SparseMatrix& s, const Tensor& x);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias);  // bias is 1 x cols
Tensor linear(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor concat_cols(Tape& tape, const Tensor& a, const Tensor& b);
Tensor relu(Tape& tape, const Tensor& x);
Tensor sigmoid(Tape& tape, const Tensor& x);
Tensor scale(Tape& tape, const Tensor& x, double factor);
Tensor sum(Tape& tape, const Tensor& x);   // 1 x 1
Tensor mean(Tape& tape, const Tensor& x);  // 1 x 1

/// Mean squared error over all elements; 1 x 1.
Tensor mse(Tape& tape, const Tensor& prediction, const Matrix& target);

inline constexpr double kLogClamp = 1e-12;

/// Class-weighted binary cross entropy, averaged over rows and channels:
///   -mean( w * (y log c + (1 - y) log(1 - c)) ),  w = (1 - y) * gamma + y.
/// Logs are clamped at kLogClamp. Labels must be 0 or 1.
Tensor weighted_bce(Tape& tape, const Tensor& probability, const Matrix& labels, double gamma);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::size_t step = 0;
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads, AdamState& state,
               double learning_rate, const AdamOptions& options = {});

/// Named, ordered collection of trainable tensors.
class ParameterSet {
 public:
  Tensor& add(std::string name, Matrix init);
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

/// Adam over every tensor of a ParameterSet. Tensors without a gradient are
/// updated with a zero gradient.
class Adam {
 public:
  explicit Adam(ParameterSet& params, AdamOptions options = {});
  void step(double learning_rate);
  const AdamState& state() const { return state_; }

 private:
  ParameterSet* params_;
  AdamOptions options_;
  AdamState state_;
};

}  // namespace lhnn::ad
