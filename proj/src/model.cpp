// SPDX-License-Identifier: Apache-2.0

#include "lhnn/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "lhnn/error.hpp"
#include "lhnn/eval.hpp"
#include "lhnn/features.hpp"
#include "lhnn/format.hpp"

namespace lhnn {

using ad::Tape;
using ad::Tensor;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::size_t parse_count(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("config key '" + std::string(key) + "' expects a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("config key '" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("config key '" + std::string(key) + "' expects true or false, got '" + std::string(v) + "'");
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

Tensor lin_act(Tape& tape, const ad::ParameterSet& params, const std::string& name, const Tensor& x) {
  return ad::relu(tape, apply_linear(tape, params, name, x));
}

void add_residual(ad::ParameterSet& params, Rng& rng, const std::string& name, std::size_t in, std::size_t out) {
  add_linear(params, rng, name + ".l1", in, out);
  add_linear(params, rng, name + ".l2", out, out);
  if (in != out) add_linear(params, rng, name + ".proj", in, out, false);
}

// x W_proj (or x) + W2 relu(W1 x + b1) + b2
Tensor apply_residual(Tape& tape, const ad::ParameterSet& params, const std::string& name, const Tensor& x) {
  const Tensor h = lin_act(tape, params, name + ".l1", x);
  const Tensor y = apply_linear(tape, params, name + ".l2", h);
  const std::string proj = name + ".proj";
  const Tensor skip = params.contains(proj + ".w") ? apply_linear(tape, params, proj, x) : x;
  return ad::add(tape, skip, y);
}

void add_lattice_block(ad::ParameterSet& params, Rng& rng, const std::string& name, std::size_t h) {
  add_linear(params, rng, name + ".f", h, h);
  add_linear(params, rng, name + ".phi", h, h);
}

Matrix column_stat(const std::vector<const Matrix*>& parts, Eigen::Index cols, bool want_scale, const Matrix& mean) {
  Matrix out = Matrix::Zero(1, cols);
  double n = 0.0;
  for (const Matrix* m : parts) {
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      if (want_scale) {
        out += (m->row(i) - mean).cwiseAbs2();
      } else {
        out += m->row(i);
      }
      n += 1.0;
    }
  }
  if (n > 0.0) out /= n;
  if (want_scale) {
    out = out.cwiseSqrt();
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(out(0, j) > 1e-12)) out(0, j) = 1.0;
    }
  }
  return out;
}

Matrix standardize(const Matrix& raw, const Matrix& mean, const Matrix& scale) {
  if (raw.cols() != mean.cols()) throw ShapeError("feature width does not match the standardizer");
  Matrix out = raw;
  out.rowwise() -= mean.row(0);
  out.array().rowwise() /= scale.row(0).array();
  return out;
}

}  // namespace

double LHNNConfig::learning_rate_at(std::size_t epoch) const {
  return epoch < (epochs + 1) / 2 ? learning_rate : learning_rate_late;
}

void LHNNConfig::validate() const {
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (mlp_depth < 1) throw ConfigError("mlp_depth must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(learning_rate > 0.0) || !(learning_rate_late > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(gnet_filter_fraction > 0.0 && gnet_filter_fraction <= 1.0)) {
    throw ConfigError("gnet_filter_fraction must lie in (0, 1]");
  }
  if (sampling.fan_featuregen < 1 || sampling.fan_hypermp < 1 || sampling.fan_latticemp < 1) {
    throw ConfigError("sampling fanouts must be >= 1");
  }
}

void LHNNConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "hidden_dim") hidden_dim = parse_count(key, value);
  else if (key == "n_hypermp") n_hypermp = parse_count(key, value);
  else if (key == "n_latticemp_encode") n_latticemp_encode = parse_count(key, value);
  else if (key == "n_latticemp_joint") n_latticemp_joint = parse_count(key, value);
  else if (key == "mlp_depth") mlp_depth = parse_count(key, value);
  else if (key == "gamma") gamma = parse_double(key, value);
  else if (key == "learning_rate") learning_rate = parse_double(key, value);
  else if (key == "learning_rate_late") learning_rate_late = parse_double(key, value);
  else if (key == "epochs") epochs = parse_count(key, value);
  else if (key == "seed") seed = parse_count(key, value);
  else if (key == "use_featuregen_edges") use_featuregen_edges = parse_bool(key, value);
  else if (key == "use_hypermp_edges") use_hypermp_edges = parse_bool(key, value);
  else if (key == "use_latticemp_edges") use_latticemp_edges = parse_bool(key, value);
  else if (key == "use_regression_head") use_regression_head = parse_bool(key, value);
  else if (key == "use_gcell_features") use_gcell_features = parse_bool(key, value);
  else if (key == "channel_mode") {
    if (value == "uni") channel_mode = ChannelMode::Uni;
    else if (value == "duo") channel_mode = ChannelMode::Duo;
    else throw ConfigError("channel_mode must be uni or duo, got '" + std::string(value) + "'");
  } else if (key == "sampling") sampling.enabled = parse_bool(key, value);
  else if (key == "fan_featuregen") sampling.fan_featuregen = parse_count(key, value);
  else if (key == "fan_hypermp") sampling.fan_hypermp = parse_count(key, value);
  else if (key == "fan_latticemp") sampling.fan_latticemp = parse_count(key, value);
  else if (key == "gnet_filter_fraction") gnet_filter_fraction = parse_double(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

bool LHNNConfig::operator==(const LHNNConfig& other) const { return config_to_text(*this) == config_to_text(other); }

std::string config_to_text(const LHNNConfig& c) {
  std::string out = "version = " + std::to_string(LHNNConfig::kVersion) + "\n";
  auto line = [&out](const char* key, const std::string& value) { out += std::string(key) + " = " + value + "\n"; };
  line("hidden_dim", std::to_string(c.hidden_dim));
  line("n_hypermp", std::to_string(c.n_hypermp));
  line("n_latticemp_encode", std::to_string(c.n_latticemp_encode));
  line("n_latticemp_joint", std::to_string(c.n_latticemp_joint));
  line("mlp_depth", std::to_string(c.mlp_depth));
  line("gamma", format_real(c.gamma));
  line("learning_rate", format_real(c.learning_rate));
  line("learning_rate_late", format_real(c.learning_rate_late));
  line("epochs", std::to_string(c.epochs));
  line("seed", std::to_string(c.seed));
  line("use_featuregen_edges", bool_text(c.use_featuregen_edges));
  line("use_hypermp_edges", bool_text(c.use_hypermp_edges));
  line("use_latticemp_edges", bool_text(c.use_latticemp_edges));
  line("use_regression_head", bool_text(c.use_regression_head));
  line("use_gcell_features", bool_text(c.use_gcell_features));
  line("channel_mode", c.channel_mode == ChannelMode::Uni ? "uni" : "duo");
  line("sampling", bool_text(c.sampling.enabled));
  line("fan_featuregen", std::to_string(c.sampling.fan_featuregen));
  line("fan_hypermp", std::to_string(c.sampling.fan_hypermp));
  line("fan_latticemp", std::to_string(c.sampling.fan_latticemp));
  line("gnet_filter_fraction", format_real(c.gnet_filter_fraction));
  return out;
}

LHNNConfig config_from_text(std::string_view text) {
  LHNNConfig config;
  bool versioned = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "version") {
      if (parse_count(key, value) != LHNNConfig::kVersion) {
        throw ConfigError("unsupported config version '" + std::string(value) + "'");
      }
      versioned = true;
      continue;
    }
    config.set(key, value);
  }
  if (!versioned) throw ConfigError("config document has no version line");
  config.validate();
  return config;
}

Standardizer Standardizer::identity() {
  Standardizer s;
  s.cell_mean = Matrix::Zero(1, kCellFeatureCount);
  s.cell_scale = Matrix::Ones(1, kCellFeatureCount);
  s.net_mean = Matrix::Zero(1, kNetFeatureCount);
  s.net_scale = Matrix::Ones(1, kNetFeatureCount);
  return s;
}

Standardizer Standardizer::fit(const std::vector<const LHGraph*>& graphs) {
  std::vector<const Matrix*> cells;
  std::vector<const Matrix*> nets;
  for (const LHGraph* g : graphs) {
    cells.push_back(&g->cell_features);
    nets.push_back(&g->net_features);
  }
  Standardizer s;
  s.cell_mean = column_stat(cells, kCellFeatureCount, false, Matrix());
  s.cell_scale = column_stat(cells, kCellFeatureCount, true, s.cell_mean);
  s.net_mean = column_stat(nets, kNetFeatureCount, false, Matrix());
  s.net_scale = column_stat(nets, kNetFeatureCount, true, s.net_mean);
  return s;
}

Matrix Standardizer::cells(const Matrix& raw) const { return standardize(raw, cell_mean, cell_scale); }
Matrix Standardizer::nets(const Matrix& raw) const { return standardize(raw, net_mean, net_scale); }

BlockOperators full_operators(const MessageOperators& ops) {
  return {ops.net_to_cell, ops.net_to_cell, ops.cell_to_net, ops.lattice};
}

SparseMatrix sample_rows(const SparseMatrix& op, std::size_t fanout, bool mean, Rng& rng) {
  std::vector<Triplet> entries;
  std::vector<std::size_t> order;
  for (std::size_t r = 0; r < op.rows(); ++r) {
    const auto cols = op.row_cols(r);
    const auto vals = op.row_values(r);
    const std::size_t degree = cols.size();
    if (degree <= fanout) {
      for (std::size_t k = 0; k < degree; ++k) entries.push_back({r, cols[k], vals[k]});
      continue;
    }
    order.resize(degree);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < fanout; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(degree - i));
      std::swap(order[i], order[j]);
    }
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(fanout));
    const double w = 1.0 / static_cast<double>(fanout);
    for (std::size_t i = 0; i < fanout; ++i) entries.push_back({r, cols[order[i]], mean ? w : vals[order[i]]});
  }
  return SparseMatrix::from_triplets(op.rows(), op.cols(), std::move(entries));
}

BlockOperators sample_neighbors(const MessageOperators& ops, const SamplingConfig& fanouts, std::uint64_t seed) {
  Rng rng(seed);
  BlockOperators out;
  out.featuregen_nc = sample_rows(ops.net_to_cell, fanouts.fan_featuregen, false, rng);
  out.hypermp_nc = sample_rows(ops.net_to_cell, fanouts.fan_hypermp, false, rng);
  out.hypermp_cn = sample_rows(ops.cell_to_net, fanouts.fan_hypermp, true, rng);
  out.lattice = sample_rows(ops.lattice, fanouts.fan_latticemp, true, rng);
  return out;
}

void add_linear(ad::ParameterSet& params, Rng& rng, const std::string& name, std::size_t in, std::size_t out,
                bool bias) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(in, 1)));
  Matrix w(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
  params.add(name + ".w", std::move(w));
  if (bias) params.add(name + ".b", Matrix::Zero(1, static_cast<Eigen::Index>(out)));
}

Tensor apply_linear(Tape& tape, const ad::ParameterSet& params, const std::string& name, const Tensor& x) {
  const std::string b = name + ".b";
  if (params.contains(b)) return ad::linear(tape, x, params.at(name + ".w"), params.at(b));
  return ad::matmul(tape, x, params.at(name + ".w"));
}

LHNNModel::LHNNModel(const LHNNConfig& config) : config_(config), norm_(Standardizer::identity()) {
  config_.validate();
  Rng rng(config_.seed);
  const std::size_t h = config_.hidden_dim;
  const std::size_t k = config_.outputs();
  add_residual(params_, rng, "fg.res_c", kCellFeatureCount, h);
  add_residual(params_, rng, "fg.res_n", kNetFeatureCount, h);
  add_linear(params_, rng, "fg.phi_c", 2 * h, h);
  add_linear(params_, rng, "fg.phi_n", h, h);
  for (std::size_t l = 0; l < config_.n_hypermp; ++l) {
    const std::string p = "hmp" + std::to_string(l);
    add_residual(params_, rng, p + ".res_c", h, h);
    add_linear(params_, rng, p + ".phi_n", 2 * h, h);
    add_residual(params_, rng, p + ".res_n", h, h);
    add_linear(params_, rng, p + ".phi_c", 2 * h, h);
    add_residual(params_, rng, p + ".skip_c", h, h);
  }
  for (std::size_t l = 0; l < config_.n_latticemp_encode; ++l) add_lattice_block(params_, rng, "enc" + std::to_string(l), h);
  for (std::size_t l = 0; l < config_.n_latticemp_joint; ++l) add_lattice_block(params_, rng, "reg" + std::to_string(l), h);
  add_linear(params_, rng, "reg.head", h, k);
  add_linear(params_, rng, "cls.in", 2 * h, h);
  for (std::size_t l = 0; l < config_.n_latticemp_joint; ++l) add_lattice_block(params_, rng, "cls" + std::to_string(l), h);
  add_linear(params_, rng, "cls.head", h, k);
}

GraphInputs LHNNModel::inputs(const LHGraph& graph, const BlockOperators& ops) const {
  GraphInputs in;
  in.cells = norm_.cells(graph.cell_features);
  in.nets = norm_.nets(graph.net_features);
  if (!config_.use_gcell_features) {
    in.cells.col(kCellNetDensityH).setZero();
    in.cells.col(kCellNetDensityV).setZero();
    in.cells.col(kCellPinDensity).setZero();
  }
  in.ops = &ops;
  return in;
}

std::pair<Tensor, Tensor> LHNNModel::feature_gen(Tape& tape, const Tensor& vc0, const Tensor& vn0,
                                                 const BlockOperators& ops) const {
  const Tensor fc = apply_residual(tape, params_, "fg.res_c", vc0);
  const Tensor fn = apply_residual(tape, params_, "fg.res_n", vn0);
  const Tensor agg = config_.use_featuregen_edges ? ad::spmm(tape, ops.featuregen_nc, fn)
                                                  : Tensor::zeros(fc.rows(), fc.cols());
  Tensor vc1 = lin_act(tape, params_, "fg.phi_c", ad::concat_cols(tape, fc, agg));
  Tensor vn1 = lin_act(tape, params_, "fg.phi_n", fn);
  return {vc1, vn1};
}

std::pair<Tensor, Tensor> LHNNModel::hypermp_layer(Tape& tape, std::size_t layer, const Tensor& vc, const Tensor& vn,
                                                   const Tensor& vc1, const Tensor& vn1,
                                                   const BlockOperators& ops) const {
  const std::string p = "hmp" + std::to_string(layer);
  const Tensor rc = apply_residual(tape, params_, p + ".res_c", vc);
  const Tensor to_net = config_.use_hypermp_edges ? ad::spmm(tape, ops.hypermp_cn, rc)
                                                  : Tensor::zeros(vn.rows(), rc.cols());
  const Tensor fused_n = lin_act(tape, params_, p + ".phi_n", ad::concat_cols(tape, to_net, vn1));
  Tensor vn_next = ad::add(tape, fused_n, apply_residual(tape, params_, p + ".res_n", vn));
  const Tensor to_cell = config_.use_hypermp_edges ? ad::spmm(tape, ops.hypermp_nc, vn_next)
                                                   : Tensor::zeros(vc.rows(), vn_next.cols());
  const Tensor fused_c = lin_act(tape, params_, p + ".phi_c", ad::concat_cols(tape, to_cell, vc1));
  Tensor vc_next = ad::add(tape, fused_c, apply_residual(tape, params_, p + ".skip_c", vc));
  return {vc_next, vn_next};
}

Tensor LHNNModel::latticemp_layer(Tape& tape, const std::string& prefix, const Tensor& vc,
                                  const BlockOperators& ops) const {
  const Tensor msg = lin_act(tape, params_, prefix + ".f", vc);
  // Without lattice edges each G-cell only hears its own message.
  const Tensor agg = config_.use_latticemp_edges ? ad::spmm(tape, ops.lattice, msg) : msg;
  return ad::add(tape, lin_act(tape, params_, prefix + ".phi", agg), vc);
}

ForwardTensors LHNNModel::forward(Tape& tape, const GraphInputs& in) const {
  if (in.ops == nullptr) throw Error("forward: graph inputs carry no operators");
  const BlockOperators& ops = *in.ops;
  const Tensor vc0 = Tensor::constant(in.cells);
  const Tensor vn0 = Tensor::constant(in.nets);
  auto [vc1, vn1] = feature_gen(tape, vc0, vn0, ops);
  Tensor vc = vc1;
  Tensor vn = vn1;
  for (std::size_t l = 0; l < config_.n_hypermp; ++l) std::tie(vc, vn) = hypermp_layer(tape, l, vc, vn, vc1, vn1, ops);
  for (std::size_t l = 0; l < config_.n_latticemp_encode; ++l) vc = latticemp_layer(tape, "enc" + std::to_string(l), vc, ops);

  Tensor r = vc;
  for (std::size_t l = 0; l < config_.n_latticemp_joint; ++l) r = latticemp_layer(tape, "reg" + std::to_string(l), r, ops);
  ForwardTensors out;
  out.reg = apply_linear(tape, params_, "reg.head", r);

  const Tensor joint = config_.use_regression_head ? r : Tensor::zeros(r.rows(), r.cols());
  Tensor c = lin_act(tape, params_, "cls.in", ad::concat_cols(tape, vc, joint));
  for (std::size_t l = 0; l < config_.n_latticemp_joint; ++l) c = latticemp_layer(tape, "cls" + std::to_string(l), c, ops);
  out.cls = ad::sigmoid(tape, apply_linear(tape, params_, "cls.head", c));
  return out;
}

LossTerms loss_total(Tape& tape, const Tensor& cls, const Tensor& reg, const Matrix& y_reg, const Matrix& y_cls,
                     double gamma, bool use_regression) {
  LossTerms terms;
  const Tensor l_cls = ad::weighted_bce(tape, cls, y_cls, gamma);
  terms.loss_cls = l_cls.scalar();
  if (use_regression) {
    const Tensor l_reg = ad::mse(tape, reg, y_reg);
    terms.loss_reg = l_reg.scalar();
    terms.total = ad::add(tape, l_reg, l_cls);
  } else {
    terms.total = l_cls;
  }
  terms.loss = terms.total.scalar();
  return terms;
}

LossTerms LHNNModel::loss(Tape& tape, const ForwardTensors& out, const Matrix& y_reg, const Matrix& y_cls) const {
  return loss_total(tape, out.cls, out.reg, y_reg, y_cls, config_.gamma, config_.use_regression_head);
}

Prediction LHNNModel::predict(const LHGraph& graph) const {
  const BlockOperators ops = full_operators(normalized_operators(graph));
  Tape tape;
  const ForwardTensors out = forward(tape, inputs(graph, ops));
  return {out.cls.value(), out.reg.value()};
}

Checkpoint LHNNModel::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.metadata = "model = lhnn\n" + config_to_text(config_);
  ckpt.tensors.emplace_back("norm.cell_mean", norm_.cell_mean);
  ckpt.tensors.emplace_back("norm.cell_scale", norm_.cell_scale);
  ckpt.tensors.emplace_back("norm.net_mean", norm_.net_mean);
  ckpt.tensors.emplace_back("norm.net_scale", norm_.net_scale);
  for (const auto& [name, t] : params_.items()) ckpt.tensors.emplace_back(name, t.value());
  return ckpt;
}

namespace {

void load_tensor(Matrix& dst, const Checkpoint& ckpt, const std::string& name) {
  const Matrix& src = ckpt.at(name);
  if (src.rows() != dst.rows() || src.cols() != dst.cols()) {
    throw ShapeError("checkpoint tensor '" + name + "' has the wrong shape");
  }
  dst = src;
}

}  // namespace

LHNNModel LHNNModel::from_checkpoint(const Checkpoint& ckpt) {
  const std::string_view tag = "model = lhnn\n";
  if (ckpt.metadata.rfind(tag, 0) != 0) throw ConfigError("checkpoint does not hold an LHNN model");
  LHNNModel model(config_from_text(std::string_view(ckpt.metadata).substr(tag.size())));
  load_tensor(model.norm_.cell_mean, ckpt, "norm.cell_mean");
  load_tensor(model.norm_.cell_scale, ckpt, "norm.cell_scale");
  load_tensor(model.norm_.net_mean, ckpt, "norm.net_mean");
  load_tensor(model.norm_.net_scale, ckpt, "norm.net_scale");
  for (const auto& [name, t] : model.params_.items()) {
    Tensor handle = t;
    load_tensor(handle.mutable_value(), ckpt, name);
  }
  if (ckpt.tensors.size() != model.params_.size() + 4) throw ConfigError("checkpoint has unexpected tensors");
  return model;
}

std::string epoch_csv_header() { return "epoch,lr,loss,loss_reg,loss_cls,f1,acc\n"; }

std::string epoch_csv_row(const EpochMetrics& m) {
  return std::to_string(m.epoch) + "," + format_significant(m.learning_rate, 9) + "," + format_significant(m.loss, 9) +
         "," + format_significant(m.loss_reg, 9) + "," + format_significant(m.loss_cls, 9) + "," +
         format_significant(m.f1, 9) + "," + format_significant(m.acc, 9) + "\n";
}

LHNNModel train_lhnn(const std::vector<TrainingSample>& samples, const LHNNConfig& config,
                     std::vector<EpochMetrics>* log, const EpochCallback& on_epoch) {
  LHNNModel model(config);
  if (samples.empty()) return model;
  std::vector<const LHGraph*> graphs;
  for (const auto& s : samples) {
    if (s.graph == nullptr) throw Error("training sample '" + s.name + "' has no graph");
    const auto n = static_cast<Eigen::Index>(s.graph->n_gcells());
    const auto k = static_cast<Eigen::Index>(config.outputs());
    if (s.y_cls.rows() != n || s.y_cls.cols() != k || s.y_reg.rows() != n || s.y_reg.cols() != k) {
      throw ShapeError("labels of '" + s.name + "' do not match its graph");
    }
    graphs.push_back(s.graph);
  }
  model.standardizer() = Standardizer::fit(graphs);

  std::vector<MessageOperators> full;
  std::vector<BlockOperators> blocks;
  for (const LHGraph* g : graphs) {
    full.push_back(normalized_operators(*g));
    blocks.push_back(full_operators(full.back()));
  }

  ad::Adam adam(model.params());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochMetrics m;
    m.epoch = epoch + 1;
    m.learning_rate = config.learning_rate_at(epoch);
    Confusion pooled;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      BlockOperators sampled;
      const BlockOperators* ops = &blocks[i];
      if (config.sampling.enabled) {
        sampled = sample_neighbors(full[i], config.sampling, mix_seed(config.seed, epoch * samples.size() + i));
        ops = &sampled;
      }
      Tape tape;
      const ForwardTensors out = model.forward(tape, model.inputs(*samples[i].graph, *ops));
      const LossTerms terms = model.loss(tape, out, samples[i].y_reg, samples[i].y_cls);
      if (!std::isfinite(terms.loss)) {
        throw DivergenceError("loss became non-finite at epoch " + std::to_string(epoch + 1) + " on '" +
                              samples[i].name + "'");
      }
      model.params().zero_grad();
      tape.backward(terms.total);
      adam.step(m.learning_rate);
      m.loss += terms.loss;
      m.loss_reg += terms.loss_reg;
      m.loss_cls += terms.loss_cls;
      pooled += confusion(out.cls.value(), samples[i].y_cls);
    }
    const double n = static_cast<double>(samples.size());
    m.loss /= n;
    m.loss_reg /= n;
    m.loss_cls /= n;
    const Metrics metrics = metrics_from(pooled);
    m.f1 = metrics.f1;
    m.acc = metrics.acc;
    if (log != nullptr) log->push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return model;
}

}  // namespace lhnn
