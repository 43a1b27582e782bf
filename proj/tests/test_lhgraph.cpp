// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "lhnn/error.hpp"
#include "lhnn/lhgraph.hpp"
#include "lhnn/sparse.hpp"
#include "support.hpp"

namespace lhnn {
namespace {

using testing::box_circuit;

TEST(Sparse, CanonicalOrderAndDuplicates) {
  const SparseMatrix m = SparseMatrix::from_triplets(2, 3, {{1, 0, 2.0}, {0, 2, 1.0}, {0, 1, 3.0}});
  EXPECT_EQ(m.triplets(), (std::vector<Triplet>{{0, 1, 3.0}, {0, 2, 1.0}, {1, 0, 2.0}}));
  EXPECT_EQ(m.to_triplet_text(), "0 1 3\n0 2 1\n1 0 2\n");
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{0, 0, 1}, {0, 0, 1}}), Error);
  EXPECT_EQ(m.transpose().transpose(), m);
  EXPECT_EQ(m.row_sums(), (std::vector<double>{4.0, 2.0}));
  EXPECT_EQ(m.col_sums(), (std::vector<double>{2.0, 3.0, 1.0}));
}

TEST(Snap, IntervalRules) {
  // interior, shared boundary on the upper bound, and the outer border
  EXPECT_EQ(snap_interval(0.5, 2.5, 1, 4).lo, 0u);
  EXPECT_EQ(snap_interval(0.5, 2.5, 1, 4).hi, 2u);
  EXPECT_EQ(snap_interval(0.5, 2.0, 1, 4).hi, 1u);
  EXPECT_EQ(snap_interval(1.0, 1.0, 1, 4).lo, 0u);
  EXPECT_EQ(snap_interval(1.0, 1.0, 1, 4).hi, 0u);
  EXPECT_EQ(snap_interval(4.0, 4.0, 1, 4).lo, 3u);
  EXPECT_EQ(snap_interval(0.0, 0.0, 1, 4).hi, 0u);
  EXPECT_THROW(snap_interval(5.0, 6.0, 1, 4), GeometryError);
}

TEST(GNet, SixCellBox) {
  const GNet g = gnet_from_net(box_circuit(4, 4, {{0.5, 0.5, 2.5, 1.5}}), 0);
  EXPECT_EQ(g.col_lo, 0u);
  EXPECT_EQ(g.col_hi, 2u);
  EXPECT_EQ(g.row_lo, 0u);
  EXPECT_EQ(g.row_hi, 1u);
  EXPECT_EQ(g.span_h(), 3u);
  EXPECT_EQ(g.span_v(), 2u);
  EXPECT_EQ(g.area(), 6u);
  EXPECT_EQ(g.cells, (std::vector<std::size_t>{0, 1, 2, 4, 5, 6}));
}

TEST(GNet, DegeneratePoint) {
  const GNet g = gnet_from_net(box_circuit(4, 4, {{1.5, 1.5, 1.5, 1.5}}), 0);
  EXPECT_EQ(g.area(), 1u);
  EXPECT_EQ(g.cells, (std::vector<std::size_t>{5}));
}

TEST(GNet, EightCellNet) {
  // a 4 x 2 block of G-cells
  const GNet g = gnet_from_net(box_circuit(6, 6, {{1.2, 2.1, 4.8, 3.9}}), 0);
  EXPECT_EQ(g.cells.size(), 8u);
}

TEST(Lattice, SmallGrids) {
  EXPECT_EQ(build_lattice_adjacency({1, 1}).nnz(), 0u);
  EXPECT_EQ(build_lattice_adjacency({2, 2}).nnz(), 8u);
  const SparseMatrix a = build_lattice_adjacency({3, 3});
  EXPECT_EQ(a.row_cols(4).size(), 4u);
  EXPECT_EQ(a.row_sums()[0], 2.0);
  EXPECT_EQ(a.transpose(), a);
}

TEST(Incidence, ColumnsMatchGNets) {
  const Circuit c = box_circuit(4, 4, {{0.5, 0.5, 2.5, 1.5}, {3.5, 3.5, 3.5, 3.5}});
  const auto gnets = gnets_from_circuit(c);
  const SparseMatrix h = build_incidence(gnets, 16);
  EXPECT_EQ(h.col_sums(), (std::vector<double>{6.0, 1.0}));
  EXPECT_EQ(build_incidence({}, 16).cols(), 0u);
  EXPECT_EQ(build_incidence({}, 16).rows(), 16u);
  GNet bad = gnets[0];
  bad.cells.push_back(99);
  EXPECT_THROW(build_incidence({bad}, 16), ShapeError);
}

TEST(Degrees, CountsCoverage) {
  const Circuit c = box_circuit(3, 3, {{0.5, 0.5, 1.5, 1.5}, {1.5, 1.5, 2.5, 2.5}});
  const LHGraph g = build_lhgraph(c, {1.0});
  EXPECT_EQ(g.degrees.net_cell, (std::vector<double>{4.0, 4.0}));
  EXPECT_EQ(g.degrees.cell_net[4], 2.0);  // the centre is in both boxes
  EXPECT_EQ(g.degrees.cell_net[0], 1.0);
  EXPECT_EQ(g.degrees.cell_net[2], 0.0);
  EXPECT_EQ(g.degrees.lattice[0], 2.0);
}

TEST(Filter, StrictThreshold) {
  GNet big;
  big.col_hi = 25;  // area 26
  GNet edge;
  edge.col_hi = 24;  // area 25
  const FilterResult r = filter_large_gnets({big, edge}, 10000, 0.0025);
  EXPECT_EQ(r.removed, 1u);
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept[0].area(), 25u);
  EXPECT_EQ(filter_large_gnets({big, edge}, 10000, 1.0).removed, 0u);
  EXPECT_THROW(filter_large_gnets({}, 10, 0.0), ConfigError);
}

TEST(Operators, NormalizedRows) {
  const Circuit c = box_circuit(4, 4, {{0.5, 0.5, 1.5, 1.5}});
  const LHGraph g = build_lhgraph(c, {1.0});
  const MessageOperators ops = normalized_operators(g);
  EXPECT_EQ(ops.net_to_cell, g.incidence);
  for (double v : ops.cell_to_net.row_values(0)) EXPECT_EQ(v, 0.25);
  EXPECT_EQ(ops.cell_to_net.row_values(0).size(), 4u);
  const auto interior = ops.lattice.row_values(5);
  ASSERT_EQ(interior.size(), 4u);
  for (double v : interior) EXPECT_EQ(v, 0.25);
  EXPECT_THROW(normalized_operators(build_lhgraph(box_circuit(1, 1, {}))), GeometryError);
}

TEST(LHGraph, BuildBasics) {
  const Circuit c = box_circuit(4, 4, {{0.5, 0.5, 2.5, 1.5}, {0.2, 0.2, 3.9, 3.9}, {1.5, 2.5, 1.5, 2.5}});
  const LHGraph g = build_lhgraph(c, {1.0});
  EXPECT_EQ(g.n_gcells(), 16u);
  EXPECT_EQ(g.n_gnets(), 3u);
  const LHGraph none = build_lhgraph(box_circuit(4, 4, {}));
  EXPECT_EQ(none.incidence.nnz(), 0u);
  EXPECT_EQ(none.adjacency.nnz(), 48u);
}

TEST(LHGraph, Deterministic) {
  Rng rng(3);
  const Circuit c = testing::random_circuit(rng, 7, 5, 20);
  const LHGraph a = build_lhgraph(c, {1.0});
  const LHGraph b = build_lhgraph(c, {1.0});
  EXPECT_EQ(a.incidence, b.incidence);
  EXPECT_EQ(a.adjacency, b.adjacency);
  EXPECT_EQ(a.cell_features, b.cell_features);
}

TEST(LHGraph, GNetsAreRectangles) {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const Circuit c = testing::random_circuit(rng, 2 + rng.below(10), 2 + rng.below(10), 15);
    for (const GNet& g : gnets_from_circuit(c)) {
      EXPECT_EQ(g.cells.size(), g.area());
      std::set<std::size_t> want;
      for (std::size_t r = g.row_lo; r <= g.row_hi; ++r) {
        for (std::size_t col = g.col_lo; col <= g.col_hi; ++col) want.insert(r * c.grid.nx + col);
      }
      EXPECT_EQ(std::set<std::size_t>(g.cells.begin(), g.cells.end()), want);
    }
  }
}

}  // namespace
}  // namespace lhnn
