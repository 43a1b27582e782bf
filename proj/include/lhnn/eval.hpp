// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lhnn/features.hpp"
#include "lhnn/matrix.hpp"
#include "lhnn/netlist.hpp"

namespace lhnn {

/// Per-G-cell routing demand and congestion labels.
struct LabeledMaps {
  std::size_t nx = 0;
  std::size_t ny = 0;
  Plane demand_h;
  Plane demand_v;
  Plane cong_h;  // 0 or 1
  Plane cong_v;

  double congestion_rate_h() const;
  double congestion_rate_v() const;

  /// n x k label matrices; k = 1 keeps the horizontal channel only.
  Matrix demand_matrix(std::size_t channels) const;
  Matrix congestion_matrix(std::size_t channels) const;
};

/// 1 where demand strictly exceeds capacity.
Plane congestion_labels(const Plane& demand, double capacity);

LabeledMaps make_labeled_maps(const GridSpec& grid, Plane demand_h, Plane demand_v);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  Confusion& operator+=(const Confusion& other);
};

struct Metrics {
  double f1 = 0.0;
  double acc = 0.0;
  Confusion counts;
};

/// Predictions are positive when probability >= threshold.
Confusion confusion(std::span<const double> probability, std::span<const double> labels, double threshold = 0.5);
Confusion confusion(const Matrix& probability, const Matrix& labels, double threshold = 0.5);

/// F1 = 2TP / (2TP + FP + FN), reported as 0 when there are no true positives.
Metrics metrics_from(const Confusion& counts);

Metrics f1_and_acc(std::span<const double> probability, std::span<const double> labels, double threshold = 0.5);
Metrics f1_and_acc(const Matrix& probability, const Matrix& labels, double threshold = 0.5);

/// Micro metrics pool every G-cell; macro metrics average per-circuit values.
struct EvalReport {
  Metrics micro;
  double macro_f1 = 0.0;
  double macro_acc = 0.0;
  std::vector<Metrics> per_circuit;
};

/// Each pair is (probabilities, labels) for one circuit.
EvalReport evaluate(const std::vector<std::pair<Matrix, Matrix>>& circuits, double threshold = 0.5);

struct SplitSpec {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  double train_rate = 0.0;
  double test_rate = 0.0;

  double difference() const;
  std::string to_string() const;
};

/// Exhaustive search over every n_train : n_test split of the corpus for the
/// smallest difference in mean congestion rate. Ids are ordered
/// lexicographically and the first optimal train set in that order wins.
SplitSpec search_split(std::vector<std::pair<std::string, double>> rates, std::size_t n_train, std::size_t n_test);

}  // namespace lhnn
