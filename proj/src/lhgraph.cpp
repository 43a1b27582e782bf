// SPDX-License-Identifier: Apache-2.0

#include "lhnn/lhgraph.hpp"

#include <algorithm>
#include <cmath>

#include "lhnn/error.hpp"
#include "lhnn/features.hpp"

namespace lhnn {

IndexRange snap_interval(double lo, double hi, double cell_size, std::size_t count) {
  const double extent = static_cast<double>(count) * cell_size;
  if (hi < 0.0 || lo > extent || lo > hi) {
    throw GeometryError("interval [" + std::to_string(lo) + ", " + std::to_string(hi) + "] lies outside the grid");
  }
  const auto clamp_index = [count](double v) {
    if (v < 0.0) return std::size_t{0};
    const auto k = static_cast<std::size_t>(v);
    return std::min(k, count - 1);
  };
  // Upper bound: ceil(q) - 1 puts a bound on a boundary into the lower G-cell.
  const std::size_t idx_hi = clamp_index(std::ceil(hi / cell_size) - 1.0);
  const std::size_t idx_lo = std::min(clamp_index(std::floor(lo / cell_size)), idx_hi);
  return {idx_lo, idx_hi};
}

GNet gnet_from_net(const Circuit& circuit, std::size_t net_index) {
  const Net& net = circuit.nets.at(net_index);
  const Rect box = net_bounding_box(circuit, net);
  const GridSpec& grid = circuit.grid;
  const IndexRange cols = snap_interval(box.xl, box.xh, grid.cell_w, grid.nx);
  const IndexRange rows = snap_interval(box.yl, box.yh, grid.cell_h, grid.ny);

  GNet g;
  g.net = net_index;
  g.col_lo = cols.lo;
  g.col_hi = cols.hi;
  g.row_lo = rows.lo;
  g.row_hi = rows.hi;
  g.npin = net.npin();
  g.cells.reserve(g.area());
  for (std::size_t r = rows.lo; r <= rows.hi; ++r) {
    for (std::size_t c = cols.lo; c <= cols.hi; ++c) g.cells.push_back(grid.index(c, r));
  }
  return g;
}

std::vector<GNet> gnets_from_circuit(const Circuit& circuit) {
  std::vector<GNet> gnets;
  gnets.reserve(circuit.nets.size());
  for (std::size_t i = 0; i < circuit.nets.size(); ++i) gnets.push_back(gnet_from_net(circuit, i));
  return gnets;
}

SparseMatrix build_lattice_adjacency(const GridSpec& grid) {
  std::vector<Triplet> entries;
  entries.reserve(4 * grid.gcell_count());
  for (std::size_t r = 0; r < grid.ny; ++r) {
    for (std::size_t c = 0; c < grid.nx; ++c) {
      const std::size_t i = grid.index(c, r);
      if (r > 0) entries.push_back({i, grid.index(c, r - 1), 1.0});
      if (c > 0) entries.push_back({i, grid.index(c - 1, r), 1.0});
      if (c + 1 < grid.nx) entries.push_back({i, grid.index(c + 1, r), 1.0});
      if (r + 1 < grid.ny) entries.push_back({i, grid.index(c, r + 1), 1.0});
    }
  }
  return SparseMatrix::from_triplets(grid.gcell_count(), grid.gcell_count(), std::move(entries));
}

SparseMatrix build_incidence(const std::vector<GNet>& gnets, std::size_t n_gcells) {
  std::vector<Triplet> entries;
  for (std::size_t j = 0; j < gnets.size(); ++j) {
    for (std::size_t cell : gnets[j].cells) {
      if (cell >= n_gcells) {
        throw ShapeError("G-net " + std::to_string(j) + " covers G-cell " + std::to_string(cell) +
                         " outside a grid of " + std::to_string(n_gcells));
      }
      entries.push_back({cell, j, 1.0});
    }
  }
  return SparseMatrix::from_triplets(n_gcells, gnets.size(), std::move(entries));
}

DegreeVectors degree_vectors(const SparseMatrix& incidence, const SparseMatrix& adjacency) {
  if (incidence.rows() != adjacency.rows() || adjacency.rows() != adjacency.cols()) {
    throw ShapeError("degree_vectors: incidence and adjacency dimensions disagree");
  }
  return {incidence.row_sums(), incidence.col_sums(), adjacency.row_sums()};
}

FilterResult filter_large_gnets(std::vector<GNet> gnets, std::size_t n_gcells, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("G-net filter fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  const double limit = fraction * static_cast<double>(n_gcells);
  FilterResult result;
  result.kept.reserve(gnets.size());
  for (auto& g : gnets) {
    if (static_cast<double>(g.area()) > limit) {
      ++result.removed;
    } else {
      result.kept.push_back(std::move(g));
    }
  }
  return result;
}

MessageOperators normalized_operators(const LHGraph& graph) {
  for (std::size_t i = 0; i < graph.degrees.lattice.size(); ++i) {
    if (graph.degrees.lattice[i] <= 0.0) {
      throw GeometryError("G-cell " + std::to_string(i) + " has no lattice neighbours; grid too small");
    }
  }
  std::vector<double> inv_b(graph.degrees.net_cell.size());
  for (std::size_t j = 0; j < inv_b.size(); ++j) {
    if (graph.degrees.net_cell[j] <= 0.0) throw GeometryError("G-net " + std::to_string(j) + " covers no G-cell");
    inv_b[j] = 1.0 / graph.degrees.net_cell[j];
  }
  std::vector<double> inv_p(graph.degrees.lattice.size());
  for (std::size_t i = 0; i < inv_p.size(); ++i) inv_p[i] = 1.0 / graph.degrees.lattice[i];

  MessageOperators ops;
  ops.net_to_cell = graph.incidence;
  ops.cell_to_net = graph.incidence.transpose().scale_rows(inv_b);
  ops.lattice = graph.adjacency.scale_rows(inv_p);
  return ops;
}

LHGraph build_lhgraph(const Circuit& circuit, const BuildOptions& options) {
  require_valid(circuit);
  LHGraph graph;
  graph.grid = circuit.grid;
  FilterResult filtered =
      filter_large_gnets(gnets_from_circuit(circuit), circuit.grid.gcell_count(), options.gnet_filter_fraction);
  graph.gnets = std::move(filtered.kept);
  graph.removed_gnets = filtered.removed;
  graph.incidence = build_incidence(graph.gnets, graph.n_gcells());
  graph.adjacency = build_lattice_adjacency(graph.grid);
  graph.degrees = degree_vectors(graph.incidence, graph.adjacency);
  graph.cell_features = assemble_gcell_features(circuit, graph.gnets);
  graph.net_features = assemble_gnet_features(graph.gnets);
  return graph;
}

}  // namespace lhnn
