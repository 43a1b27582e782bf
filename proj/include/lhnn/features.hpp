// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lhnn/lhgraph.hpp"
#include "lhnn/matrix.hpp"
#include "lhnn/netlist.hpp"

namespace lhnn {

/// One value per G-cell, indexed row * nx + col.
using Plane = std::vector<double>;

struct FeatureMap {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::pair<std::string, Plane>> channels;

  const Plane& channel(const std::string& name) const;
};

// G-cell feature columns, in order.
inline constexpr std::size_t kCellNetDensityH = 0;
inline constexpr std::size_t kCellNetDensityV = 1;
inline constexpr std::size_t kCellPinDensity = 2;
inline constexpr std::size_t kCellTerminalMask = 3;
inline constexpr std::size_t kCellFeatureCount = 4;

// G-net feature columns, in order.
inline constexpr std::size_t kNetSpanV = 0;
inline constexpr std::size_t kNetSpanH = 1;
inline constexpr std::size_t kNetPinCount = 2;
inline constexpr std::size_t kNetArea = 3;
inline constexpr std::size_t kNetFeatureCount = 4;

struct NetDensity {
  Plane horizontal;  // sum of 1 / span_v over covering G-nets
  Plane vertical;    // sum of 1 / span_h over covering G-nets
};

NetDensity net_density_maps(const std::vector<GNet>& gnets, const GridSpec& grid);

/// Sum of npin * (span_h + span_v) / area over covering G-nets.
Plane rudy_map(const std::vector<GNet>& gnets, const GridSpec& grid);

/// Sum of npin / area over covering G-nets (pins spread uniformly over the box).
Plane pin_density_map(const std::vector<GNet>& gnets, const GridSpec& grid);

/// 1 where a terminal footprint overlaps the G-cell with positive area.
Plane terminal_mask(const Circuit& circuit);

Matrix assemble_gcell_features(const Circuit& circuit, const std::vector<GNet>& gnets);
Matrix assemble_gnet_features(const std::vector<GNet>& gnets);

/// All crafted planes: net_density_h, net_density_v, pin_density, terminal_mask, rudy.
FeatureMap crafted_feature_map(const Circuit& circuit, const std::vector<GNet>& gnets);

/// H * payload: one-step sum aggregation from G-nets onto G-cells.
Plane recover_by_message_passing(const LHGraph& graph, std::span<const double> payload);

}  // namespace lhnn
