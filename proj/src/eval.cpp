// SPDX-License-Identifier: Apache-2.0

#include "lhnn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lhnn/error.hpp"
#include "lhnn/format.hpp"

namespace lhnn {

namespace {

double mean_of(const Plane& p) {
  if (p.empty()) return 0.0;
  return std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
}

Matrix stack_columns(const Plane& a, const Plane& b, std::size_t channels) {
  if (channels != 1 && channels != 2) throw ConfigError("channel count must be 1 or 2");
  Matrix m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(channels));
  for (std::size_t i = 0; i < a.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = a[i];
    if (channels == 2) m(static_cast<Eigen::Index>(i), 1) = b[i];
  }
  return m;
}

}  // namespace

double LabeledMaps::congestion_rate_h() const { return mean_of(cong_h); }
double LabeledMaps::congestion_rate_v() const { return mean_of(cong_v); }

Matrix LabeledMaps::demand_matrix(std::size_t channels) const { return stack_columns(demand_h, demand_v, channels); }

Matrix LabeledMaps::congestion_matrix(std::size_t channels) const {
  return stack_columns(cong_h, cong_v, channels);
}

Plane congestion_labels(const Plane& demand, double capacity) {
  Plane out(demand.size());
  std::transform(demand.begin(), demand.end(), out.begin(), [capacity](double d) { return d > capacity ? 1.0 : 0.0; });
  return out;
}

LabeledMaps make_labeled_maps(const GridSpec& grid, Plane demand_h, Plane demand_v) {
  if (demand_h.size() != grid.gcell_count() || demand_v.size() != grid.gcell_count()) {
    throw ShapeError("demand planes do not match the grid");
  }
  LabeledMaps maps;
  maps.nx = grid.nx;
  maps.ny = grid.ny;
  maps.cong_h = congestion_labels(demand_h, grid.cap_h);
  maps.cong_v = congestion_labels(demand_v, grid.cap_v);
  maps.demand_h = std::move(demand_h);
  maps.demand_v = std::move(demand_v);
  return maps;
}

Confusion& Confusion::operator+=(const Confusion& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  tn += other.tn;
  return *this;
}

Confusion confusion(std::span<const double> probability, std::span<const double> labels, double threshold) {
  if (probability.size() != labels.size()) throw ShapeError("confusion: prediction/label length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = probability[i] >= threshold;
    const bool truth = labels[i] > 0.5;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Confusion confusion(const Matrix& probability, const Matrix& labels, double threshold) {
  if (probability.rows() != labels.rows() || probability.cols() != labels.cols()) {
    throw ShapeError("confusion: prediction/label shape mismatch");
  }
  return confusion(std::span<const double>(probability.data(), static_cast<std::size_t>(probability.size())),
                   std::span<const double>(labels.data(), static_cast<std::size_t>(labels.size())), threshold);
}

Metrics metrics_from(const Confusion& counts) {
  Metrics m;
  m.counts = counts;
  const double denom = 2.0 * static_cast<double>(counts.tp) + static_cast<double>(counts.fp + counts.fn);
  m.f1 = counts.tp == 0 ? 0.0 : 2.0 * static_cast<double>(counts.tp) / denom;
  m.acc = counts.total() == 0 ? 0.0
                              : static_cast<double>(counts.tp + counts.tn) / static_cast<double>(counts.total());
  return m;
}

Metrics f1_and_acc(std::span<const double> probability, std::span<const double> labels, double threshold) {
  return metrics_from(confusion(probability, labels, threshold));
}

Metrics f1_and_acc(const Matrix& probability, const Matrix& labels, double threshold) {
  return metrics_from(confusion(probability, labels, threshold));
}

EvalReport evaluate(const std::vector<std::pair<Matrix, Matrix>>& circuits, double threshold) {
  EvalReport report;
  Confusion pooled;
  for (const auto& [prob, labels] : circuits) {
    const Confusion c = confusion(prob, labels, threshold);
    pooled += c;
    report.per_circuit.push_back(metrics_from(c));
    report.macro_f1 += report.per_circuit.back().f1;
    report.macro_acc += report.per_circuit.back().acc;
  }
  report.micro = metrics_from(pooled);
  if (!circuits.empty()) {
    report.macro_f1 /= static_cast<double>(circuits.size());
    report.macro_acc /= static_cast<double>(circuits.size());
  }
  return report;
}

double SplitSpec::difference() const { return std::abs(train_rate - test_rate); }

std::string SplitSpec::to_string() const {
  std::string out = "train";
  for (const auto& id : train_ids) out += " " + id;
  out += "\ntest";
  for (const auto& id : test_ids) out += " " + id;
  out += "\ntrain_rate " + format_real(train_rate) + "\ntest_rate " + format_real(test_rate) + "\ndifference " +
         format_real(difference()) + "\n";
  return out;
}

SplitSpec search_split(std::vector<std::pair<std::string, double>> rates, std::size_t n_train, std::size_t n_test) {
  const std::size_t n = rates.size();
  if (n_train == 0 || n_test == 0 || n_train + n_test != n) {
    throw ConfigError("split " + std::to_string(n_train) + ":" + std::to_string(n_test) + " does not fit a corpus of " +
                      std::to_string(n) + " circuits");
  }
  std::sort(rates.begin(), rates.end());
  for (std::size_t i = 1; i < n; ++i) {
    if (rates[i].first == rates[i - 1].first) throw ConfigError("duplicate circuit id '" + rates[i].first + "'");
  }
  // C(n, k) guard against runaway enumeration.
  double combos = 1.0;
  for (std::size_t i = 0; i < n_train; ++i) combos = combos * static_cast<double>(n - i) / static_cast<double>(i + 1);
  if (combos > 5e7) throw ConfigError("split search space too large");

  auto mean_over = [&](const std::vector<bool>& in_train, bool side) {
    double s = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_train[i] == side) {
        s += rates[i].second;
        ++k;
      }
    }
    return s / static_cast<double>(k);
  };

  // Combinations of indices in lexicographic order.
  std::vector<std::size_t> pick(n_train);
  std::iota(pick.begin(), pick.end(), 0);
  std::vector<bool> best;
  double best_diff = 0.0;
  std::vector<bool> in_train(n);
  while (true) {
    std::fill(in_train.begin(), in_train.end(), false);
    for (std::size_t i : pick) in_train[i] = true;
    const double diff = std::abs(mean_over(in_train, true) - mean_over(in_train, false));
    if (best.empty() || diff < best_diff) {
      best = in_train;
      best_diff = diff;
    }
    std::size_t i = n_train;
    while (i > 0 && pick[i - 1] == n - n_train + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n_train; ++j) pick[j] = pick[j - 1] + 1;
  }

  SplitSpec split;
  for (std::size_t i = 0; i < n; ++i) (best[i] ? split.train_ids : split.test_ids).push_back(rates[i].first);
  split.train_rate = mean_over(best, true);
  split.test_rate = mean_over(best, false);
  return split;
}

}  // namespace lhnn
