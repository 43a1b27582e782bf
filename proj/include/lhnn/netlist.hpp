// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lhnn {

/// Placement region divided into nx * ny G-cells of identical size.
/// G-cell (col, row) covers [col * cell_w, (col + 1) * cell_w] x [row * cell_h, (row + 1) * cell_h].
struct GridSpec {
  std::size_t nx = 1;
  std::size_t ny = 1;
  double cell_w = 1.0;
  double cell_h = 1.0;
  double cap_h = 0.0;  // horizontal routing tracks per G-cell
  double cap_v = 0.0;  // vertical routing tracks per G-cell

  std::size_t gcell_count() const { return nx * ny; }
  double width() const { return static_cast<double>(nx) * cell_w; }
  double height() const { return static_cast<double>(ny) * cell_h; }
  std::size_t index(std::size_t col, std::size_t row) const { return row * nx + col; }

  bool operator==(const GridSpec&) const = default;
};

enum class CellKind { Movable, Terminal };

struct Cell {
  std::string id;
  CellKind kind = CellKind::Movable;
  double x = 0.0;  // lower-left corner
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool operator==(const Cell&) const = default;
};

struct Pin {
  std::size_t cell = 0;  // index into Circuit::cells
  double dx = 0.0;       // offset from the cell's lower-left corner
  double dy = 0.0;

  bool operator==(const Pin&) const = default;
};

struct Net {
  std::string id;
  std::vector<std::size_t> pins;  // indices into Circuit::pins

  std::size_t npin() const { return pins.size(); }
  bool operator==(const Net&) const = default;
};

struct Circuit {
  GridSpec grid;
  std::vector<Cell> cells;
  std::vector<Pin> pins;
  std::vector<Net> nets;

  bool operator==(const Circuit&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Closed axis-aligned rectangle [xl, xh] x [yl, yh]; may be degenerate.
struct Rect {
  double xl = 0.0;
  double yl = 0.0;
  double xh = 0.0;
  double yh = 0.0;
  bool operator==(const Rect&) const = default;
};

/// Parses the line-oriented circuit format:
///
///   GRID nx ny cell_w cell_h cap_h cap_v
///   CELL id kind x y w h        (kind: x | movable | t | terminal)
///   PIN  cell_id dx dy          (pins numbered 0.. in order of appearance)
///   NET  id pin_index ...
///
/// '#' starts a comment. Throws ParseError on malformed input.
Circuit parse_circuit(std::string_view text);

/// Inverse of parse_circuit. Numbers are written in shortest round-trip form.
std::string serialize_circuit(const Circuit& circuit);

Point pin_position(const Circuit& circuit, const Pin& pin);

/// Minimal rectangle containing every pin of `net`. Requires npin >= 1.
Rect net_bounding_box(const Circuit& circuit, const Net& net);

struct Violation {
  enum class Kind {
    Grid,
    DuplicateCellId,
    DuplicateNetId,
    NegativeSize,
    CellOutsideGrid,
    DanglingPin,
    PinOffset,
    EmptyNet,
    DanglingNetPin,
  };
  Kind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Lists every invariant violation of `circuit`; an empty report means valid.
ValidationReport validate(const Circuit& circuit);

/// Throws ValidationError carrying the report text unless `circuit` is valid.
void require_valid(const Circuit& circuit);

}  // namespace lhnn
