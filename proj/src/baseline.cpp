// SPDX-License-Identifier: Apache-2.0

#include "lhnn/baseline.hpp"

#include <cmath>

#include "lhnn/error.hpp"
#include "lhnn/eval.hpp"
#include "lhnn/features.hpp"

namespace lhnn {

using ad::Tape;
using ad::Tensor;

namespace {

constexpr std::string_view kTag = "model = mlp\n";

std::string layer_name(std::size_t i) { return "mlp" + std::to_string(i); }

}  // namespace

MLPModel::MLPModel(const LHNNConfig& config) : config_(config), norm_(Standardizer::identity()) {
  config_.validate();
  Rng rng(config_.seed);
  std::size_t width = kCellFeatureCount;
  for (std::size_t i = 0; i < config_.mlp_depth; ++i) {
    add_linear(params_, rng, layer_name(i), width, config_.hidden_dim);
    width = config_.hidden_dim;
  }
  add_linear(params_, rng, "mlp.head", width, config_.outputs());
}

Matrix MLPModel::inputs(const LHGraph& graph) const {
  Matrix cells = norm_.cells(graph.cell_features);
  if (!config_.use_gcell_features) {
    cells.col(kCellNetDensityH).setZero();
    cells.col(kCellNetDensityV).setZero();
    cells.col(kCellPinDensity).setZero();
  }
  return cells;
}

Tensor MLPModel::forward(Tape& tape, const Matrix& cells) const {
  Tensor x = Tensor::constant(cells);
  std::size_t width = static_cast<std::size_t>(cells.cols());
  for (std::size_t i = 0; i < config_.mlp_depth; ++i) {
    const Tensor y = ad::relu(tape, apply_linear(tape, params_, layer_name(i), x));
    x = width == config_.hidden_dim ? ad::add(tape, x, y) : y;
    width = config_.hidden_dim;
  }
  return ad::sigmoid(tape, apply_linear(tape, params_, "mlp.head", x));
}

Prediction MLPModel::predict(const LHGraph& graph) const {
  Tape tape;
  return {forward(tape, inputs(graph)).value(), Matrix()};
}

Checkpoint MLPModel::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.metadata = std::string(kTag) + config_to_text(config_);
  ckpt.tensors.emplace_back("norm.cell_mean", norm_.cell_mean);
  ckpt.tensors.emplace_back("norm.cell_scale", norm_.cell_scale);
  for (const auto& [name, t] : params_.items()) ckpt.tensors.emplace_back(name, t.value());
  return ckpt;
}

MLPModel MLPModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.metadata.rfind(kTag, 0) != 0) throw ConfigError("checkpoint does not hold an MLP model");
  MLPModel model(config_from_text(std::string_view(ckpt.metadata).substr(kTag.size())));
  auto load = [&ckpt](Matrix& dst, const std::string& name) {
    const Matrix& src = ckpt.at(name);
    if (src.rows() != dst.rows() || src.cols() != dst.cols()) {
      throw ShapeError("checkpoint tensor '" + name + "' has the wrong shape");
    }
    dst = src;
  };
  load(model.norm_.cell_mean, "norm.cell_mean");
  load(model.norm_.cell_scale, "norm.cell_scale");
  for (const auto& [name, t] : model.params_.items()) {
    Tensor handle = t;
    load(handle.mutable_value(), name);
  }
  if (ckpt.tensors.size() != model.params_.size() + 2) throw ConfigError("checkpoint has unexpected tensors");
  return model;
}

MLPModel train_mlp(const std::vector<TrainingSample>& samples, const LHNNConfig& config,
                   std::vector<EpochMetrics>* log, const EpochCallback& on_epoch) {
  MLPModel model(config);
  if (samples.empty()) return model;
  std::vector<const LHGraph*> graphs;
  for (const auto& s : samples) {
    if (s.graph == nullptr) throw Error("training sample '" + s.name + "' has no graph");
    if (s.y_cls.rows() != static_cast<Eigen::Index>(s.graph->n_gcells()) ||
        s.y_cls.cols() != static_cast<Eigen::Index>(config.outputs())) {
      throw ShapeError("labels of '" + s.name + "' do not match its graph");
    }
    graphs.push_back(s.graph);
  }
  model.standardizer() = Standardizer::fit(graphs);
  std::vector<Matrix> inputs;
  for (const LHGraph* g : graphs) inputs.push_back(model.inputs(*g));

  ad::Adam adam(model.params());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochMetrics m;
    m.epoch = epoch + 1;
    m.learning_rate = config.learning_rate_at(epoch);
    Confusion pooled;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      Tape tape;
      const Tensor cls = model.forward(tape, inputs[i]);
      const Tensor loss = ad::weighted_bce(tape, cls, samples[i].y_cls, config.gamma);
      if (!std::isfinite(loss.scalar())) {
        throw DivergenceError("loss became non-finite at epoch " + std::to_string(epoch + 1) + " on '" +
                              samples[i].name + "'");
      }
      model.params().zero_grad();
      tape.backward(loss);
      adam.step(m.learning_rate);
      m.loss += loss.scalar();
      m.loss_cls += loss.scalar();
      pooled += confusion(cls.value(), samples[i].y_cls);
    }
    m.loss /= static_cast<double>(samples.size());
    m.loss_cls /= static_cast<double>(samples.size());
    const Metrics metrics = metrics_from(pooled);
    m.f1 = metrics.f1;
    m.acc = metrics.acc;
    if (log != nullptr) log->push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return model;
}

std::string checkpoint_model_kind(const Checkpoint& checkpoint) {
  if (checkpoint.metadata.rfind("model = lhnn\n", 0) == 0) return "lhnn";
  if (checkpoint.metadata.rfind(kTag, 0) == 0) return "mlp";
  throw ConfigError("checkpoint metadata names no known model");
}

}  // namespace lhnn
