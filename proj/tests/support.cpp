// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <unistd.h>

#include "lhnn/synth.hpp"

namespace lhnn::testing {

Circuit random_circuit(Rng& rng, std::size_t nx, std::size_t ny, std::size_t n_nets, double cell) {
  Circuit c;
  c.grid = {nx, ny, cell, cell, 2.0, 2.0};
  const double width = c.grid.width();
  const double height = c.grid.height();
  auto coord = [&](double lo, double hi) {
    double v = rng.uniform(lo, hi);
    if (rng.bernoulli(0.3)) v = std::clamp(std::round(v / (0.5 * cell)) * 0.5 * cell, lo, hi);
    return v;
  };
  const std::size_t n_cells = 1 + rng.below(std::max<std::size_t>(2, nx * ny));
  for (std::size_t i = 0; i < n_cells; ++i) {
    Cell k;
    k.id = "c" + std::to_string(i);
    k.kind = rng.bernoulli(0.1) ? CellKind::Terminal : CellKind::Movable;
    k.w = std::min(width, rng.uniform(0.0, 2.0 * cell));
    k.h = std::min(height, rng.uniform(0.0, 2.0 * cell));
    k.x = coord(0.0, width - k.w);
    k.y = coord(0.0, height - k.h);
    c.cells.push_back(k);
  }
  for (std::size_t n = 0; n < n_nets; ++n) {
    Net net;
    net.id = "n" + std::to_string(n);
    const std::size_t k = 1 + rng.below(6);
    for (std::size_t p = 0; p < k; ++p) {
      const std::size_t owner = rng.below(c.cells.size());
      const Cell& cl = c.cells[owner];
      net.pins.push_back(c.pins.size());
      c.pins.push_back({owner, rng.bernoulli(0.2) ? cl.w : rng.uniform(0.0, cl.w), rng.uniform(0.0, cl.h)});
    }
    c.nets.push_back(net);
  }
  return c;
}

Circuit box_circuit(std::size_t nx, std::size_t ny, const std::vector<Rect>& boxes) {
  Circuit c;
  c.grid = {nx, ny, 1, 1, 1, 1};
  c.cells.push_back({"o", CellKind::Movable, 0, 0, static_cast<double>(nx), static_cast<double>(ny)});
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    Net n{"n" + std::to_string(i), {}};
    n.pins.push_back(c.pins.size());
    c.pins.push_back({0, boxes[i].xl, boxes[i].yl});
    n.pins.push_back(c.pins.size());
    c.pins.push_back({0, boxes[i].xh, boxes[i].yh});
    c.nets.push_back(n);
  }
  return c;
}

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

Toy toy_set(std::size_t n) {
  Toy toy;
  SynthSpec spec;
  spec.nx = 6;
  spec.ny = 6;
  spec.n_nets = 20;
  std::vector<LabeledMaps> labels;
  for (std::size_t i = 0; i < n; ++i) {
    spec.seed = 50 + i;
    Circuit c = gen_synthetic(spec);
    c.grid.cap_h = c.grid.cap_v = 1;
    toy.graphs.push_back(build_lhgraph(c, {1.0}));
    labels.push_back(oracle_labels(c));
  }
  for (std::size_t i = 0; i < n; ++i) {
    toy.samples.push_back({"t" + std::to_string(i), &toy.graphs[i], labels[i].demand_matrix(1), labels[i].congestion_matrix(1)});
  }
  return toy;
}

std::string scratch_dir(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("lhnn_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

}  // namespace lhnn::testing
