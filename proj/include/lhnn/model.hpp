// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "lhnn/checkpoint.hpp"
#include "lhnn/lhgraph.hpp"
#include "lhnn/matrix.hpp"
#include "lhnn/random.hpp"
#include "lhnn/tensor.hpp"

namespace lhnn {

enum class ChannelMode { Uni, Duo };

struct SamplingConfig {
  bool enabled = false;
  std::size_t fan_featuregen = 6;
  std::size_t fan_hypermp = 3;
  std::size_t fan_latticemp = 2;
};

struct LHNNConfig {
  static constexpr int kVersion = 1;

  std::size_t hidden_dim = 32;
  std::size_t n_hypermp = 2;
  std::size_t n_latticemp_encode = 1;
  std::size_t n_latticemp_joint = 2;
  std::size_t mlp_depth = 4;  // baseline only
  double gamma = 0.7;
  double learning_rate = 2e-3;       // first half of the epochs
  double learning_rate_late = 5e-4;  // second half
  std::size_t epochs = 500;
  std::uint64_t seed = 1;
  bool use_featuregen_edges = true;
  bool use_hypermp_edges = true;
  bool use_latticemp_edges = true;
  bool use_regression_head = true;
  bool use_gcell_features = true;
  ChannelMode channel_mode = ChannelMode::Uni;
  SamplingConfig sampling;
  double gnet_filter_fraction = kDefaultGNetFilterFraction;

  std::size_t outputs() const { return channel_mode == ChannelMode::Uni ? 1 : 2; }
  double learning_rate_at(std::size_t epoch) const;

  /// Throws ConfigError when a value is out of range.
  void validate() const;

  /// Sets one key from its text form; throws ConfigError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);

  bool operator==(const LHNNConfig&) const;
};

/// "version = 1" followed by one "key = value" line per field.
std::string config_to_text(const LHNNConfig& config);
LHNNConfig config_from_text(std::string_view text);

/// Per-channel z-score of G-cell and G-net input features, fitted on training graphs.
struct Standardizer {
  Matrix cell_mean;
  Matrix cell_scale;
  Matrix net_mean;
  Matrix net_scale;

  static Standardizer identity();
  static Standardizer fit(const std::vector<const LHGraph*>& graphs);
  Matrix cells(const Matrix& raw) const;
  Matrix nets(const Matrix& raw) const;
};

/// Aggregation operators as seen by each block type; either the full
/// normalized operators or a per-epoch neighbour sample.
struct BlockOperators {
  SparseMatrix featuregen_nc;  // G-net -> G-cell, sum
  SparseMatrix hypermp_nc;     // G-net -> G-cell, sum
  SparseMatrix hypermp_cn;     // G-cell -> G-net, mean
  SparseMatrix lattice;        // G-cell -> G-cell, mean
};

BlockOperators full_operators(const MessageOperators& ops);

/// Samples min(fanout, degree) incoming edges per destination row, without
/// replacement, and re-normalizes the mean operators over the sample.
SparseMatrix sample_rows(const SparseMatrix& op, std::size_t fanout, bool mean, Rng& rng);
BlockOperators sample_neighbors(const MessageOperators& ops, const SamplingConfig& fanouts, std::uint64_t seed);

struct Prediction {
  Matrix cls;  // n_gcells x k, sigmoid probabilities
  Matrix reg;  // n_gcells x k
};

/// Inputs of one forward pass: standardized features and operators.
struct GraphInputs {
  Matrix cells;  // n_gcells x 4
  Matrix nets;   // n_gnets x 4
  const BlockOperators* ops = nullptr;
};

struct ForwardTensors {
  ad::Tensor cls;
  ad::Tensor reg;
};

struct LossTerms {
  ad::Tensor total;
  double loss = 0.0;
  double loss_reg = 0.0;
  double loss_cls = 0.0;
};

class LHNNModel {
 public:
  /// Fresh parameters, initialized from config.seed.
  explicit LHNNModel(const LHNNConfig& config);

  const LHNNConfig& config() const { return config_; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }
  Standardizer& standardizer() { return norm_; }
  const Standardizer& standardizer() const { return norm_; }

  GraphInputs inputs(const LHGraph& graph, const BlockOperators& ops) const;

  // Blocks, exposed for testing. All return n x hidden_dim tensors.
  std::pair<ad::Tensor, ad::Tensor> feature_gen(ad::Tape& tape, const ad::Tensor& vc0, const ad::Tensor& vn0,
                                                const BlockOperators& ops) const;
  std::pair<ad::Tensor, ad::Tensor> hypermp_layer(ad::Tape& tape, std::size_t layer, const ad::Tensor& vc,
                                                  const ad::Tensor& vn, const ad::Tensor& vc1, const ad::Tensor& vn1,
                                                  const BlockOperators& ops) const;
  ad::Tensor latticemp_layer(ad::Tape& tape, const std::string& prefix, const ad::Tensor& vc,
                             const BlockOperators& ops) const;

  ForwardTensors forward(ad::Tape& tape, const GraphInputs& in) const;
  LossTerms loss(ad::Tape& tape, const ForwardTensors& out, const Matrix& y_reg, const Matrix& y_cls) const;

  Prediction predict(const LHGraph& graph) const;

  Checkpoint to_checkpoint() const;
  static LHNNModel from_checkpoint(const Checkpoint& checkpoint);

 private:
  LHNNConfig config_;
  ad::ParameterSet params_;
  Standardizer norm_;
};

/// Loss as in training, computed outside a model (for direct checks).
LossTerms loss_total(ad::Tape& tape, const ad::Tensor& cls, const ad::Tensor& reg, const Matrix& y_reg,
                     const Matrix& y_cls, double gamma, bool use_regression);

struct TrainingSample {
  std::string name;
  const LHGraph* graph = nullptr;
  Matrix y_reg;
  Matrix y_cls;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double loss = 0.0;
  double loss_reg = 0.0;
  double loss_cls = 0.0;
  double f1 = 0.0;
  double acc = 0.0;
};

std::string epoch_csv_header();
std::string epoch_csv_row(const EpochMetrics& m);

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Full-graph (or sampled) Adam training, one step per graph per epoch.
/// Throws DivergenceError when the loss becomes non-finite.
LHNNModel train_lhnn(const std::vector<TrainingSample>& samples, const LHNNConfig& config,
                     std::vector<EpochMetrics>* log = nullptr, const EpochCallback& on_epoch = {});

/// Helpers shared with the baseline.
void add_linear(ad::ParameterSet& params, Rng& rng, const std::string& name, std::size_t in, std::size_t out,
                bool bias = true);
ad::Tensor apply_linear(ad::Tape& tape, const ad::ParameterSet& params, const std::string& name, const ad::Tensor& x);

}  // namespace lhnn
