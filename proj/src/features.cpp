// SPDX-License-Identifier: Apache-2.0

#include "lhnn/features.hpp"

#include <algorithm>

#include "lhnn/error.hpp"

namespace lhnn {

const Plane& FeatureMap::channel(const std::string& name) const {
  for (const auto& [n, plane] : channels) {
    if (n == name) return plane;
  }
  throw Error("feature map has no channel '" + name + "'");
}

namespace {

// Accumulates value(g) onto every covered G-cell, G-net order then cell order.
template <typename PerNet>
Plane accumulate(const std::vector<GNet>& gnets, const GridSpec& grid, PerNet value) {
  Plane plane(grid.gcell_count(), 0.0);
  for (const GNet& g : gnets) {
    const double v = value(g);
    for (std::size_t cell : g.cells) plane.at(cell) += v;
  }
  return plane;
}

double as_real(std::size_t n) { return static_cast<double>(n); }

}  // namespace

NetDensity net_density_maps(const std::vector<GNet>& gnets, const GridSpec& grid) {
  return {accumulate(gnets, grid, [](const GNet& g) { return 1.0 / as_real(g.span_v()); }),
          accumulate(gnets, grid, [](const GNet& g) { return 1.0 / as_real(g.span_h()); })};
}

Plane rudy_map(const std::vector<GNet>& gnets, const GridSpec& grid) {
  return accumulate(gnets, grid, [](const GNet& g) {
    return as_real(g.npin) * as_real(g.span_h() + g.span_v()) / as_real(g.area());
  });
}

Plane pin_density_map(const std::vector<GNet>& gnets, const GridSpec& grid) {
  return accumulate(gnets, grid, [](const GNet& g) { return as_real(g.npin) / as_real(g.area()); });
}

Plane terminal_mask(const Circuit& circuit) {
  const GridSpec& grid = circuit.grid;
  Plane mask(grid.gcell_count(), 0.0);
  for (const Cell& cell : circuit.cells) {
    if (cell.kind != CellKind::Terminal || !(cell.w > 0.0) || !(cell.h > 0.0)) continue;
    const double xl = std::max(cell.x, 0.0);
    const double yl = std::max(cell.y, 0.0);
    const double xh = std::min(cell.x + cell.w, grid.width());
    const double yh = std::min(cell.y + cell.h, grid.height());
    if (!(xh > xl && yh > yl)) continue;
    // Open-interval overlap: a G-cell only touching an edge is not covered.
    const IndexRange cols = snap_interval(xl, xh, grid.cell_w, grid.nx);
    const IndexRange rows = snap_interval(yl, yh, grid.cell_h, grid.ny);
    for (std::size_t r = rows.lo; r <= rows.hi; ++r) {
      for (std::size_t c = cols.lo; c <= cols.hi; ++c) mask[grid.index(c, r)] = 1.0;
    }
  }
  return mask;
}

Matrix assemble_gcell_features(const Circuit& circuit, const std::vector<GNet>& gnets) {
  const GridSpec& grid = circuit.grid;
  const NetDensity density = net_density_maps(gnets, grid);
  const Plane pins = pin_density_map(gnets, grid);
  const Plane terminals = terminal_mask(circuit);
  Matrix features(static_cast<Eigen::Index>(grid.gcell_count()), static_cast<Eigen::Index>(kCellFeatureCount));
  for (std::size_t i = 0; i < grid.gcell_count(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    features(row, kCellNetDensityH) = density.horizontal[i];
    features(row, kCellNetDensityV) = density.vertical[i];
    features(row, kCellPinDensity) = pins[i];
    features(row, kCellTerminalMask) = terminals[i];
  }
  return features;
}

Matrix assemble_gnet_features(const std::vector<GNet>& gnets) {
  Matrix features(static_cast<Eigen::Index>(gnets.size()), static_cast<Eigen::Index>(kNetFeatureCount));
  for (std::size_t j = 0; j < gnets.size(); ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    features(row, kNetSpanV) = as_real(gnets[j].span_v());
    features(row, kNetSpanH) = as_real(gnets[j].span_h());
    features(row, kNetPinCount) = as_real(gnets[j].npin);
    features(row, kNetArea) = as_real(gnets[j].area());
  }
  return features;
}

FeatureMap crafted_feature_map(const Circuit& circuit, const std::vector<GNet>& gnets) {
  const NetDensity density = net_density_maps(gnets, circuit.grid);
  FeatureMap map{circuit.grid.nx, circuit.grid.ny, {}};
  map.channels.emplace_back("net_density_h", density.horizontal);
  map.channels.emplace_back("net_density_v", density.vertical);
  map.channels.emplace_back("pin_density", pin_density_map(gnets, circuit.grid));
  map.channels.emplace_back("terminal_mask", terminal_mask(circuit));
  map.channels.emplace_back("rudy", rudy_map(gnets, circuit.grid));
  return map;
}

Plane recover_by_message_passing(const LHGraph& graph, std::span<const double> payload) {
  const SparseMatrix& h = graph.incidence;
  if (payload.size() != h.cols()) {
    throw ShapeError("payload has " + std::to_string(payload.size()) + " entries, graph has " +
                     std::to_string(h.cols()) + " G-nets");
  }
  // Visit entries column-major so the per-cell summation order matches the
  // G-net-major accumulation used by the crafted maps.
  Plane out(h.rows(), 0.0);
  const SparseMatrix ht = h.transpose();
  for (std::size_t j = 0; j < ht.rows(); ++j) {
    const auto cells = ht.row_cols(j);
    const auto values = ht.row_values(j);
    for (std::size_t k = 0; k < cells.size(); ++k) out[cells[k]] += values[k] * payload[j];
  }
  return out;
}

}  // namespace lhnn
