// SPDX-License-Identifier: Apache-2.0

#include "lhnn/synth.hpp"

#include <algorithm>
#include <cmath>

#include "lhnn/error.hpp"
#include "lhnn/random.hpp"

namespace lhnn {

namespace {

constexpr std::size_t kRailGapMin = 5;

struct Rail {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t length = 0;
  std::size_t cell = 0;
};

class Builder {
 public:
  Builder(const SynthSpec& spec, Rng& rng) : spec_(spec), rng_(rng), g_(spec.gcell_size) {
    circuit_.grid = {spec.nx, spec.ny, g_, g_, spec.cap_h, spec.cap_v};
  }

  void add_rails() {
    const double target = std::round(spec_.terminal_fraction * static_cast<double>(spec_.nx * spec_.ny));
    if (target <= 0.0) return;
    std::vector<std::size_t> rows;
    std::size_t row = static_cast<std::size_t>(rng_.between(1, 3));
    while (row + 1 < spec_.ny) {
      rows.push_back(row);
      row += kRailGapMin + static_cast<std::size_t>(rng_.between(0, 1));
    }
    if (target > static_cast<double>(rows.size() * spec_.nx)) {
      throw ConfigError("terminal_fraction " + std::to_string(spec_.terminal_fraction) +
                        " needs more terminal area than the rail rows of this grid provide");
    }
    const double mean_length = target / static_cast<double>(rows.size());
    for (std::size_t r : rows) {
      const double jitter = rng_.uniform(-0.375, 0.375);
      const auto length = static_cast<std::size_t>(
          std::clamp(std::round(mean_length * (1.0 + jitter)), 1.0, static_cast<double>(spec_.nx)));
      const auto col = static_cast<std::size_t>(rng_.between(0, static_cast<std::int64_t>(spec_.nx - length)));
      Cell cell;
      cell.id = "t" + std::to_string(rails_.size());
      cell.kind = CellKind::Terminal;
      cell.x = static_cast<double>(col) * g_;
      cell.y = static_cast<double>(r) * g_;
      cell.w = static_cast<double>(length) * g_;
      cell.h = g_;
      rails_.push_back({r, col, length, circuit_.cells.size()});
      circuit_.cells.push_back(std::move(cell));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < rails_.size(); ++i) {
      const double u = rng_.uniform01();
      rail_weight_.push_back(u * u * u);
      total += rail_weight_.back();
    }
    if (total <= 0.0) std::fill(rail_weight_.begin(), rail_weight_.end(), 1.0);
  }

  void add_movable_cells() {
    const double side = std::max(1.0, std::floor(g_ * 0.3));
    buckets_.assign(spec_.nx * spec_.ny, {});
    for (std::size_t row = 0; row < spec_.ny; ++row) {
      for (std::size_t col = 0; col < spec_.nx; ++col) {
        for (std::size_t k = 0; k < spec_.movable_per_gcell; ++k) {
          const auto span = static_cast<std::int64_t>(g_ - 1.0 - side);
          Cell cell;
          cell.id = "c" + std::to_string(circuit_.cells.size() - rails_.size());
          cell.x = static_cast<double>(col) * g_ + static_cast<double>(rng_.between(1, span));
          cell.y = static_cast<double>(row) * g_ + static_cast<double>(rng_.between(1, span));
          cell.w = side;
          cell.h = side;
          buckets_[circuit_.grid.index(col, row)].push_back(circuit_.cells.size());
          circuit_.cells.push_back(std::move(cell));
        }
      }
    }
  }

  void add_nets() {
    for (std::size_t n = 0; n < spec_.n_nets; ++n) {
      Net net;
      net.id = "n" + std::to_string(n);
      const double u = rng_.uniform01();
      if (u < spec_.anchored_fraction && !rails_.empty()) {
        anchored(net);
      } else if (u < spec_.anchored_fraction + (1.0 - spec_.anchored_fraction) * spec_.wire_fraction) {
        wire(net);
      } else {
        local(net);
      }
      circuit_.nets.push_back(std::move(net));
    }
  }

  Circuit take() { return std::move(circuit_); }

 private:
  double clip_x(double x) const { return std::clamp(x, 0.0, static_cast<double>(spec_.nx) - 1e-6); }
  double clip_y(double y) const { return std::clamp(y, 0.0, static_cast<double>(spec_.ny) - 1e-6); }

  std::size_t pick_rail() {
    double total = 0.0;
    for (double w : rail_weight_) total += w;
    double r = rng_.uniform01() * total;
    for (std::size_t i = 0; i < rail_weight_.size(); ++i) {
      r -= rail_weight_[i];
      if (r < 0.0) return i;
    }
    return rail_weight_.size() - 1;
  }

  // Pin on a movable cell of the G-cell containing (x, y), in G-cell units.
  void movable_pin(Net& net, double x, double y) {
    const auto col = static_cast<std::size_t>(x);
    const auto row = static_cast<std::size_t>(y);
    const auto& bucket = buckets_[circuit_.grid.index(col, row)];
    const std::size_t cell = bucket[rng_.below(bucket.size())];
    const Cell& c = circuit_.cells[cell];
    Pin pin;
    pin.cell = cell;
    pin.dx = static_cast<double>(rng_.between(0, static_cast<std::int64_t>(c.w)));
    pin.dy = static_cast<double>(rng_.between(0, static_cast<std::int64_t>(c.h)));
    net.pins.push_back(circuit_.pins.size());
    circuit_.pins.push_back(pin);
  }

  void terminal_pin(Net& net, const Rail& rail, std::size_t col) {
    const auto inner = static_cast<std::int64_t>(g_) - 1;
    Pin pin;
    pin.cell = rail.cell;
    pin.dx = static_cast<double>(col - rail.col) * g_ + static_cast<double>(rng_.between(1, inner));
    pin.dy = static_cast<double>(rng_.between(1, inner));
    net.pins.push_back(circuit_.pins.size());
    circuit_.pins.push_back(pin);
  }

  void anchored(Net& net) {
    const Rail& rail = rails_[pick_rail()];
    const double ax = rng_.uniform(static_cast<double>(rail.col), static_cast<double>(rail.col + rail.length));
    const std::size_t half = 1 + rng_.below(3);  // 3, 5 or 7 pins
    terminal_pin(net, rail, std::min(static_cast<std::size_t>(ax), rail.col + rail.length - 1));
    const auto row = static_cast<double>(rail.row);
    for (std::size_t i = 0; i < half; ++i) {
      const double x = clip_x(ax + rng_.uniform(-spec_.wire_spread, spec_.wire_spread));
      movable_pin(net, x, clip_y(row - rng_.uniform(0.01, spec_.rail_reach)));
    }
    for (std::size_t i = 0; i < half; ++i) {
      const double x = clip_x(ax + rng_.uniform(-spec_.wire_spread, spec_.wire_spread));
      movable_pin(net, x, clip_y(row + 1.0 + rng_.uniform(0.0, spec_.rail_reach)));
    }
  }

  void wire(Net& net) {
    const double cx = rng_.uniform(0.0, static_cast<double>(spec_.nx));
    const double y = static_cast<double>(rng_.below(spec_.ny)) + 0.5;
    for (int i = 0; i < 2; ++i) movable_pin(net, clip_x(cx + rng_.uniform(-spec_.wire_spread, spec_.wire_spread)), y);
  }

  void local(Net& net) {
    const double cx = rng_.uniform(0.0, static_cast<double>(spec_.nx));
    const double cy = rng_.uniform(0.0, static_cast<double>(spec_.ny));
    const auto k = static_cast<std::size_t>(rng_.between(static_cast<std::int64_t>(spec_.local_min_pins),
                                                         static_cast<std::int64_t>(spec_.local_max_pins)));
    const double rx = rng_.uniform(0.5, spec_.local_radius);
    const double ry = rng_.uniform(0.5, spec_.local_radius);
    for (std::size_t i = 0; i < k; ++i) {
      movable_pin(net, clip_x(cx + rng_.uniform(-rx, rx)), clip_y(cy + rng_.uniform(-ry, ry)));
    }
  }

  const SynthSpec& spec_;
  Rng& rng_;
  double g_;
  Circuit circuit_;
  std::vector<Rail> rails_;
  std::vector<double> rail_weight_;
  std::vector<std::vector<std::size_t>> buckets_;
};

}  // namespace

void SynthSpec::validate() const {
  if (nx < 1 || ny < 1) throw ConfigError("grid must have at least one G-cell");
  if (!(gcell_size >= 6.0) || gcell_size != std::floor(gcell_size)) {
    throw ConfigError("gcell_size must be an integer >= 6");
  }
  if (movable_per_gcell < 1) throw ConfigError("movable_per_gcell must be >= 1");
  if (!(terminal_fraction >= 0.0)) throw ConfigError("terminal_fraction must be >= 0");
  if (terminal_fraction > 1.0) throw ConfigError("terminal_fraction exceeds the grid area");
  if (!(anchored_fraction >= 0.0 && anchored_fraction <= 1.0)) throw ConfigError("anchored_fraction must lie in [0, 1]");
  if (!(wire_fraction >= 0.0 && wire_fraction <= 1.0)) throw ConfigError("wire_fraction must lie in [0, 1]");
  if (local_min_pins < 1 || local_min_pins > local_max_pins) throw ConfigError("need 1 <= local_min_pins <= local_max_pins");
  if (!(rail_reach > 0.0 && wire_spread >= 0.0 && local_radius >= 0.5)) throw ConfigError("net spreads out of range");
  if (!(cap_h >= 0.0 && cap_v >= 0.0)) throw ConfigError("capacities must be >= 0");
}

Circuit gen_synthetic(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Builder b(spec, rng);
  b.add_rails();
  b.add_movable_cells();
  b.add_nets();
  Circuit c = b.take();
  require_valid(c);
  return c;
}

LabeledMaps oracle_demand(const Circuit& circuit, const std::vector<GNet>& gnets) {
  const GridSpec& grid = circuit.grid;
  Plane demand_h(grid.gcell_count(), 0.0);
  Plane demand_v(grid.gcell_count(), 0.0);
  std::vector<double> xs;
  std::vector<double> ys;
  for (const GNet& g : gnets) {
    const Net& net = circuit.nets.at(g.net);
    xs.clear();
    ys.clear();
    for (std::size_t p : net.pins) {
      const Point pos = pin_position(circuit, circuit.pins.at(p));
      xs.push_back(pos.x);
      ys.push_back(pos.y);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const double mx = xs[(xs.size() - 1) / 2];
    const double my = ys[(ys.size() - 1) / 2];
    const std::size_t col = std::clamp(snap_interval(mx, mx, grid.cell_w, grid.nx).lo, g.col_lo, g.col_hi);
    const std::size_t row = std::clamp(snap_interval(my, my, grid.cell_h, grid.ny).lo, g.row_lo, g.row_hi);
    for (std::size_t c = g.col_lo; c <= g.col_hi; ++c) demand_h[grid.index(c, row)] += 1.0;
    for (std::size_t r = g.row_lo; r <= g.row_hi; ++r) demand_v[grid.index(col, r)] += 1.0;
  }
  return make_labeled_maps(grid, std::move(demand_h), std::move(demand_v));
}

LabeledMaps oracle_labels(const Circuit& circuit) { return oracle_demand(circuit, gnets_from_circuit(circuit)); }

double tune_capacity(const std::vector<const Plane*>& demands, double target, std::size_t max_capacity) {
  std::size_t total = 0;
  for (const Plane* p : demands) total += p->size();
  if (total == 0) return 0.0;
  double best = 0.0;
  double best_gap = 0.0;
  for (std::size_t c = 0; c <= max_capacity; ++c) {
    const double cap = static_cast<double>(c);
    std::size_t over = 0;
    for (const Plane* p : demands) over += static_cast<std::size_t>(std::count_if(p->begin(), p->end(), [cap](double d) { return d > cap; }));
    const double gap = std::abs(static_cast<double>(over) / static_cast<double>(total) - target);
    if (c == 0 || gap < best_gap) {
      best = cap;
      best_gap = gap;
    }
  }
  return best;
}

}  // namespace lhnn
