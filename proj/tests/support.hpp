// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lhnn/lhgraph.hpp"
#include "lhnn/matrix.hpp"
#include "lhnn/model.hpp"
#include "lhnn/netlist.hpp"
#include "lhnn/random.hpp"

namespace lhnn::testing {

/// Random valid circuit on an nx x ny grid of square G-cells. Coordinates are
/// often snapped to half G-cells so bounding boxes land on shared boundaries.
Circuit random_circuit(Rng& rng, std::size_t nx, std::size_t ny, std::size_t n_nets, double cell = 1.0);

/// One owner cell covering the whole grid and one two-pin net per box,
/// with pins on the box corners. Unit G-cells.
Circuit box_circuit(std::size_t nx, std::size_t ny, const std::vector<Rect>& boxes);

/// Entries uniform in [-1, 1).
Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols);

/// Small labelled training set: 6 x 6 synthetic circuits, 20 nets, unit capacity.
/// Samples point into `graphs`, so keep the struct alive and unmoved-from.
struct Toy {
  std::vector<LHGraph> graphs;
  std::vector<TrainingSample> samples;
};
Toy toy_set(std::size_t n);

/// Fresh empty directory under the system temp dir.
std::string scratch_dir(const std::string& name);

}  // namespace lhnn::testing
