// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lhnn/eval.hpp"
#include "lhnn/lhgraph.hpp"
#include "lhnn/netlist.hpp"

namespace lhnn {

/// Parameters of the synthetic circuit generator.
///
/// Terminals are laid out as horizontal rails, one G-cell high. A share of
/// the nets is anchored on a rail and reaches rows above and below it, so the
/// rail row carries their median pin. The rest are short horizontal wires or
/// small local clusters.
struct SynthSpec {
  std::size_t nx = 16;
  std::size_t ny = 16;
  double gcell_size = 10.0;
  std::size_t n_nets = 150;
  std::size_t movable_per_gcell = 3;
  double terminal_fraction = 0.09;   // share of G-cells covered by rails
  double anchored_fraction = 0.3;
  double wire_fraction = 0.7;        // of the non-anchored nets
  std::size_t local_min_pins = 2;
  std::size_t local_max_pins = 7;
  double rail_reach = 3.0;     // rows an anchored net extends past its rail
  double wire_spread = 5.0;    // horizontal pin scatter of anchored nets and wires, in G-cells
  double local_radius = 3.5;
  double cap_h = 6.0;
  double cap_v = 6.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Throws ConfigError on an infeasible spec.
Circuit gen_synthetic(const SynthSpec& spec);

/// Median-pin pseudo router. Each G-net adds one unit of horizontal demand
/// across its full column span on the row of its (lower) median pin y, and
/// one unit of vertical demand across its row span on the column of its
/// median pin x. Labels use the grid capacities.
LabeledMaps oracle_demand(const Circuit& circuit, const std::vector<GNet>& gnets);

/// Convenience: oracle over the unfiltered G-nets of `circuit`.
LabeledMaps oracle_labels(const Circuit& circuit);

/// Integer capacity in [0, max_capacity] whose strict-exceedance rate over
/// the pooled demand is closest to `target`; ties go to the smaller capacity.
double tune_capacity(const std::vector<const Plane*>& demands, double target, std::size_t max_capacity = 64);

}  // namespace lhnn
