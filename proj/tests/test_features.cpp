// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "lhnn/features.hpp"
#include "lhnn/lhgraph.hpp"
#include "support.hpp"

namespace lhnn {
namespace {

GNet rect(std::size_t nx, std::size_t c0, std::size_t c1, std::size_t r0, std::size_t r1, std::size_t npin) {
  GNet g;
  g.col_lo = c0;
  g.col_hi = c1;
  g.row_lo = r0;
  g.row_hi = r1;
  g.npin = npin;
  for (std::size_t r = r0; r <= r1; ++r) {
    for (std::size_t c = c0; c <= c1; ++c) g.cells.push_back(r * nx + c);
  }
  return g;
}

TEST(Features, NetDensityHandValues) {
  const GridSpec grid{8, 8, 1, 1, 1, 1};
  const GNet a = rect(8, 0, 2, 0, 1, 4);  // span_v 2
  const GNet b = rect(8, 1, 1, 0, 3, 2);  // span_v 4
  const NetDensity one = net_density_maps({a}, grid);
  for (std::size_t cell : a.cells) EXPECT_EQ(one.horizontal[cell], 0.5);
  const NetDensity two = net_density_maps({a, b}, grid);
  EXPECT_EQ(two.horizontal[1], 0.75);
  EXPECT_EQ(two.vertical[1], 1.0 / 3.0 + 1.0);
  const NetDensity none = net_density_maps({}, grid);
  for (double v : none.horizontal) EXPECT_EQ(v, 0.0);
}

TEST(Features, RudyAndPinDensity) {
  const GridSpec grid{8, 8, 1, 1, 1, 1};
  const GNet a = rect(8, 0, 2, 0, 1, 4);
  EXPECT_NEAR(rudy_map({a}, grid)[0], 10.0 / 3.0, 1e-15);
  EXPECT_EQ(rudy_map({rect(8, 5, 5, 5, 5, 2)}, grid)[45], 4.0);
  EXPECT_EQ(pin_density_map({rect(8, 0, 2, 0, 1, 6)}, grid)[0], 1.0);
  EXPECT_EQ(pin_density_map({rect(8, 3, 3, 3, 3, 1)}, grid)[27], 1.0);
}

TEST(Features, Additivity) {
  const GridSpec grid{6, 6, 1, 1, 1, 1};
  const GNet a = rect(6, 0, 1, 0, 1, 3);
  const GNet b = rect(6, 3, 5, 2, 4, 5);
  const Plane both = pin_density_map({a, b}, grid);
  const Plane pa = pin_density_map({a}, grid);
  const Plane pb = pin_density_map({b}, grid);
  for (std::size_t i = 0; i < both.size(); ++i) EXPECT_EQ(both[i], pa[i] + pb[i]);
}

TEST(Features, TerminalMask) {
  Circuit c;
  c.grid = {4, 4, 2, 2, 1, 1};
  EXPECT_EQ(terminal_mask(c), Plane(16, 0.0));
  c.cells.push_back({"t", CellKind::Terminal, 4, 6, 2, 2});  // exactly G-cell (2, 3)
  Plane want(16, 0.0);
  want[3 * 4 + 2] = 1.0;
  EXPECT_EQ(terminal_mask(c), want);
  c.cells[0] = {"t", CellKind::Terminal, 1, 1, 2, 2};  // straddles (0..1, 0..1)
  const Plane m = terminal_mask(c);
  EXPECT_EQ(m[0] + m[1] + m[4] + m[5], 4.0);
  double total = 0;
  for (double v : m) total += v;
  EXPECT_EQ(total, 4.0);
  c.cells[0].kind = CellKind::Movable;
  EXPECT_EQ(terminal_mask(c), Plane(16, 0.0));
}

TEST(Features, GNetFeatureRows) {
  const Matrix m = assemble_gnet_features({rect(8, 0, 2, 0, 1, 4)});
  EXPECT_EQ(m(0, kNetSpanV), 2.0);
  EXPECT_EQ(m(0, kNetSpanH), 3.0);
  EXPECT_EQ(m(0, kNetPinCount), 4.0);
  EXPECT_EQ(m(0, kNetArea), 6.0);
  EXPECT_EQ(assemble_gnet_features({}).rows(), 0);
  EXPECT_EQ(assemble_gnet_features({}).cols(), 4);
}

TEST(Features, ChannelOrder) {
  Circuit c;
  c.grid = {3, 3, 1, 1, 1, 1};
  c.cells.push_back({"t", CellKind::Terminal, 0, 0, 1, 1});
  c.pins.push_back({0, 0.5, 0.5});
  c.nets.push_back({"n", {0}});
  const Matrix m = assemble_gcell_features(c, gnets_from_circuit(c));
  // a one-pin net in G-cell 0: densities 1, pin density 1, terminal 1
  EXPECT_EQ(m.row(0), (Eigen::RowVector4d(1, 1, 1, 1)));
  EXPECT_EQ(m.row(1), (Eigen::RowVector4d(0, 0, 0, 0)));
  const FeatureMap fm = crafted_feature_map(c, gnets_from_circuit(c));
  std::vector<std::string> names;
  for (const auto& ch : fm.channels) names.push_back(ch.first);
  EXPECT_EQ(names, (std::vector<std::string>{"net_density_h", "net_density_v", "pin_density", "terminal_mask", "rudy"}));
}

TEST(Features, EmptyCircuitIsZero) {
  Circuit c;
  c.grid = {5, 4, 1, 1, 1, 1};
  const Matrix m = assemble_gcell_features(c, {});
  EXPECT_EQ(m.rows(), 20);
  EXPECT_EQ(m.cwiseAbs().sum(), 0.0);
}

TEST(Features, TotalMassOfNetDensity) {
  Rng rng(21);
  const Circuit c = testing::random_circuit(rng, 9, 7, 30);
  const auto gnets = gnets_from_circuit(c);
  const NetDensity d = net_density_maps(gnets, c.grid);
  double mass = 0, want = 0;
  for (double v : d.horizontal) mass += v;
  for (const GNet& g : gnets) want += static_cast<double>(g.span_h());
  EXPECT_NEAR(mass, want, 1e-9);
}

TEST(Features, RecoveredByOneStepSum) {
  Rng rng(4);
  for (int t = 0; t < 5; ++t) {
    const Circuit c = testing::random_circuit(rng, 3 + rng.below(8), 3 + rng.below(8), 25);
    const LHGraph g = build_lhgraph(c, {1.0});
    std::vector<double> inv_v, inv_h, zero(g.n_gnets(), 0.0);
    for (const GNet& n : g.gnets) {
      inv_v.push_back(1.0 / static_cast<double>(n.span_v()));
      inv_h.push_back(1.0 / static_cast<double>(n.span_h()));
    }
    const NetDensity d = net_density_maps(g.gnets, g.grid);
    const Plane rh = recover_by_message_passing(g, inv_v);
    const Plane rv = recover_by_message_passing(g, inv_h);
    for (std::size_t i = 0; i < rh.size(); ++i) {
      EXPECT_NEAR(rh[i], d.horizontal[i], 1e-12);
      EXPECT_NEAR(rv[i], d.vertical[i], 1e-12);
    }
    for (double v : recover_by_message_passing(g, zero)) EXPECT_EQ(v, 0.0);
  }
}

}  // namespace
}  // namespace lhnn
