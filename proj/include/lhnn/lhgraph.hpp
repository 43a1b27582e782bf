// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "lhnn/matrix.hpp"
#include "lhnn/netlist.hpp"
#include "lhnn/sparse.hpp"

namespace lhnn {

/// The rectangle of G-cells that contains a net's pin bounding box.
struct GNet {
  std::size_t net = 0;  // index into Circuit::nets
  std::size_t col_lo = 0;
  std::size_t col_hi = 0;
  std::size_t row_lo = 0;
  std::size_t row_hi = 0;
  std::size_t npin = 0;
  std::vector<std::size_t> cells;  // G-cell indices, row-major

  std::size_t span_h() const { return col_hi - col_lo + 1; }
  std::size_t span_v() const { return row_hi - row_lo + 1; }
  std::size_t area() const { return span_h() * span_v(); }
};

/// Column (or row) range of G-cells covered by the closed interval [lo, hi].
/// A bound on a shared G-cell boundary belongs to the lower-index G-cell; bounds
/// on the outer border snap inward. Throws GeometryError if [lo, hi] misses the grid.
struct IndexRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
};
IndexRange snap_interval(double lo, double hi, double cell_size, std::size_t count);

GNet gnet_from_net(const Circuit& circuit, std::size_t net_index);
std::vector<GNet> gnets_from_circuit(const Circuit& circuit);

/// A[i][j] = 1 iff G-cells i and j share an edge (4-neighbourhood).
SparseMatrix build_lattice_adjacency(const GridSpec& grid);

/// H[i][j] = 1 iff G-cell i is covered by gnets[j].
SparseMatrix build_incidence(const std::vector<GNet>& gnets, std::size_t n_gcells);

struct DegreeVectors {
  std::vector<double> cell_net;   // D: row sums of H
  std::vector<double> net_cell;   // B: column sums of H
  std::vector<double> lattice;    // P: row sums of A
};
DegreeVectors degree_vectors(const SparseMatrix& incidence, const SparseMatrix& adjacency);

struct FilterResult {
  std::vector<GNet> kept;
  std::size_t removed = 0;
};

inline constexpr double kDefaultGNetFilterFraction = 0.0025;

/// Drops every G-net whose area exceeds fraction * n_gcells.
FilterResult filter_large_gnets(std::vector<GNet> gnets, std::size_t n_gcells,
                                double fraction = kDefaultGNetFilterFraction);

struct LHGraph {
  GridSpec grid;
  std::vector<GNet> gnets;
  std::size_t removed_gnets = 0;
  SparseMatrix incidence;  // H, n_gcells x n_gnets
  SparseMatrix adjacency;  // A, n_gcells x n_gcells
  DegreeVectors degrees;
  Matrix cell_features;    // n_gcells x 4
  Matrix net_features;     // n_gnets x 4

  std::size_t n_gcells() const { return grid.gcell_count(); }
  std::size_t n_gnets() const { return gnets.size(); }
};

/// Aggregation operators used by the message-passing blocks.
struct MessageOperators {
  SparseMatrix net_to_cell;  // H (sum over covering G-nets)
  SparseMatrix cell_to_net;  // B^-1 H^T (mean over covered G-cells)
  SparseMatrix lattice;      // P^-1 A (mean over lattice neighbours)
};

/// Throws GeometryError on a 1x1 grid, where lattice degrees vanish.
MessageOperators normalized_operators(const LHGraph& graph);

struct BuildOptions {
  double gnet_filter_fraction = kDefaultGNetFilterFraction;
};

/// Validates `circuit` and assembles the lattice hypergraph with its features.
LHGraph build_lhgraph(const Circuit& circuit, const BuildOptions& options = {});

}  // namespace lhnn
