// SPDX-License-Identifier: Apache-2.0

#include "lhnn/netlist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lhnn/error.hpp"
#include "lhnn/format.hpp"

namespace lhnn {

ParseError::ParseError(Kind kind, std::size_t line, std::size_t column, const std::string& what)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
            to_string(kind) + ": " + what),
      kind_(kind),
      line_(line),
      column_(column) {}

const char* to_string(ParseError::Kind kind) {
  switch (kind) {
    case ParseError::Kind::Syntax: return "syntax error";
    case ParseError::Kind::DuplicateId: return "duplicate id";
    case ParseError::Kind::DanglingReference: return "dangling reference";
    case ParseError::Kind::NegativeDimension: return "negative dimension";
  }
  return "parse error";
}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' && line[j] != '#') ++j;
    tokens.push_back({line.substr(i, j - i), i + 1});
    i = j;
  }
  return tokens;
}

class LineParser {
 public:
  LineParser(std::size_t line_no, std::vector<Token> tokens) : line_(line_no), tokens_(std::move(tokens)) {}

  std::size_t line() const { return line_; }
  const Token& at(std::size_t i) const { return tokens_[i]; }

  void expect_count(std::size_t n, const char* usage) const {
    if (tokens_.size() != n) {
      const std::size_t col = tokens_.size() > n ? tokens_[n].column : end_column();
      throw ParseError(ParseError::Kind::Syntax, line_, col,
                       "expected " + std::to_string(n - 1) + " fields: " + usage);
    }
  }

  std::size_t size() const { return tokens_.size(); }

  std::size_t unsigned_at(std::size_t i) const {
    const Token& t = tokens_[i];
    std::size_t value = 0;
    const auto* first = t.text.data();
    const auto* last = first + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw ParseError(ParseError::Kind::Syntax, line_, t.column,
                       "expected a non-negative integer, got '" + std::string(t.text) + "'");
    }
    return value;
  }

  double real_at(std::size_t i) const {
    const Token& t = tokens_[i];
    double value = 0.0;
    const auto* first = t.text.data();
    const auto* last = first + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      throw ParseError(ParseError::Kind::Syntax, line_, t.column,
                       "expected a decimal number, got '" + std::string(t.text) + "'");
    }
    return value;
  }

  double dimension_at(std::size_t i, const char* what) const {
    const double value = real_at(i);
    if (value < 0.0) {
      throw ParseError(ParseError::Kind::NegativeDimension, line_, tokens_[i].column,
                       std::string(what) + " must be >= 0, got " + std::string(tokens_[i].text));
    }
    return value;
  }

 private:
  std::size_t end_column() const {
    if (tokens_.empty()) return 1;
    return tokens_.back().column + tokens_.back().text.size();
  }

  std::size_t line_;
  std::vector<Token> tokens_;
};

CellKind parse_kind(const LineParser& p, std::size_t i) {
  const auto text = p.at(i).text;
  if (text == "x" || text == "movable") return CellKind::Movable;
  if (text == "t" || text == "terminal") return CellKind::Terminal;
  throw ParseError(ParseError::Kind::Syntax, p.line(), p.at(i).column,
                   "unknown cell kind '" + std::string(text) + "' (expected x|movable|t|terminal)");
}

struct PendingPin {
  std::string cell_id;
  std::size_t line;
  std::size_t column;
};

struct PendingNetPin {
  std::size_t net;
  std::size_t slot;
  std::size_t line;
  std::size_t column;
};

}  // namespace

Circuit parse_circuit(std::string_view text) {
  Circuit circuit;
  bool have_grid = false;
  std::unordered_map<std::string, std::size_t> cell_index;
  std::unordered_set<std::string> net_ids;
  std::vector<PendingPin> pending_pins;
  std::vector<PendingNetPin> net_pin_refs;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    LineParser p(line_no, tokenize(raw));
    if (p.size() == 0) continue;
    const std::string_view keyword = p.at(0).text;

    if (keyword == "GRID") {
      if (have_grid) throw ParseError(ParseError::Kind::Syntax, line_no, p.at(0).column, "GRID declared twice");
      p.expect_count(7, "GRID nx ny cell_w cell_h cap_h cap_v");
      circuit.grid.nx = p.unsigned_at(1);
      circuit.grid.ny = p.unsigned_at(2);
      circuit.grid.cell_w = p.dimension_at(3, "cell_w");
      circuit.grid.cell_h = p.dimension_at(4, "cell_h");
      circuit.grid.cap_h = p.dimension_at(5, "cap_h");
      circuit.grid.cap_v = p.dimension_at(6, "cap_v");
      have_grid = true;
    } else if (keyword == "CELL") {
      p.expect_count(7, "CELL id kind x y w h");
      Cell cell;
      cell.id = std::string(p.at(1).text);
      cell.kind = parse_kind(p, 2);
      cell.x = p.real_at(3);
      cell.y = p.real_at(4);
      cell.w = p.dimension_at(5, "cell width");
      cell.h = p.dimension_at(6, "cell height");
      if (!cell_index.emplace(cell.id, circuit.cells.size()).second) {
        throw ParseError(ParseError::Kind::DuplicateId, line_no, p.at(1).column, "cell '" + cell.id + "'");
      }
      circuit.cells.push_back(std::move(cell));
    } else if (keyword == "PIN") {
      p.expect_count(4, "PIN cell_id dx dy");
      Pin pin;
      pin.dx = p.real_at(2);
      pin.dy = p.real_at(3);
      pending_pins.push_back({std::string(p.at(1).text), line_no, p.at(1).column});
      circuit.pins.push_back(pin);
    } else if (keyword == "NET") {
      if (p.size() < 3) {
        throw ParseError(ParseError::Kind::Syntax, line_no, p.at(0).column,
                         "expected NET id pin_index [pin_index ...] with at least one pin");
      }
      Net net;
      net.id = std::string(p.at(1).text);
      if (!net_ids.insert(net.id).second) {
        throw ParseError(ParseError::Kind::DuplicateId, line_no, p.at(1).column, "net '" + net.id + "'");
      }
      for (std::size_t i = 2; i < p.size(); ++i) {
        net_pin_refs.push_back({circuit.nets.size(), net.pins.size(), line_no, p.at(i).column});
        net.pins.push_back(p.unsigned_at(i));
      }
      circuit.nets.push_back(std::move(net));
    } else {
      throw ParseError(ParseError::Kind::Syntax, line_no, p.at(0).column,
                       "unknown record '" + std::string(keyword) + "'");
    }
  }

  if (!have_grid) throw ParseError(ParseError::Kind::Syntax, line_no, 1, "missing GRID record");

  for (std::size_t i = 0; i < pending_pins.size(); ++i) {
    const auto& ref = pending_pins[i];
    const auto it = cell_index.find(ref.cell_id);
    if (it == cell_index.end()) {
      throw ParseError(ParseError::Kind::DanglingReference, ref.line, ref.column,
                       "pin references unknown cell '" + ref.cell_id + "'");
    }
    circuit.pins[i].cell = it->second;
  }
  for (const auto& ref : net_pin_refs) {
    const std::size_t pin = circuit.nets[ref.net].pins[ref.slot];
    if (pin >= circuit.pins.size()) {
      throw ParseError(ParseError::Kind::DanglingReference, ref.line, ref.column,
                       "net '" + circuit.nets[ref.net].id + "' references unknown pin " + std::to_string(pin));
    }
  }
  return circuit;
}

std::string serialize_circuit(const Circuit& circuit) {
  std::string out;
  const GridSpec& g = circuit.grid;
  out += "GRID " + std::to_string(g.nx) + ' ' + std::to_string(g.ny) + ' ' + format_real(g.cell_w) + ' ' +
         format_real(g.cell_h) + ' ' + format_real(g.cap_h) + ' ' + format_real(g.cap_v) + '\n';
  for (const Cell& c : circuit.cells) {
    out += "CELL " + c.id + (c.kind == CellKind::Terminal ? " terminal " : " movable ") + format_real(c.x) + ' ' +
           format_real(c.y) + ' ' + format_real(c.w) + ' ' + format_real(c.h) + '\n';
  }
  for (const Pin& p : circuit.pins) {
    out += "PIN " + circuit.cells.at(p.cell).id + ' ' + format_real(p.dx) + ' ' + format_real(p.dy) + '\n';
  }
  for (const Net& n : circuit.nets) {
    out += "NET " + n.id;
    for (std::size_t pin : n.pins) out += ' ' + std::to_string(pin);
    out += '\n';
  }
  return out;
}

Point pin_position(const Circuit& circuit, const Pin& pin) {
  const Cell& cell = circuit.cells.at(pin.cell);
  return {cell.x + pin.dx, cell.y + pin.dy};
}

Rect net_bounding_box(const Circuit& circuit, const Net& net) {
  if (net.pins.empty()) throw GeometryError("net '" + net.id + "' has no pins");
  const Point first = pin_position(circuit, circuit.pins.at(net.pins.front()));
  Rect box{first.x, first.y, first.x, first.y};
  for (std::size_t pin : net.pins) {
    const Point p = pin_position(circuit, circuit.pins.at(pin));
    box.xl = std::min(box.xl, p.x);
    box.xh = std::max(box.xh, p.x);
    box.yl = std::min(box.yl, p.y);
    box.yh = std::max(box.yh, p.y);
  }
  return box;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.message << '\n';
  return os.str();
}

ValidationReport validate(const Circuit& circuit) {
  ValidationReport report;
  auto add = [&](Violation::Kind kind, std::string message) {
    report.violations.push_back({kind, std::move(message)});
  };

  const GridSpec& g = circuit.grid;
  const bool grid_ok = g.nx >= 1 && g.ny >= 1 && std::isfinite(g.cell_w) && g.cell_w > 0.0 &&
                       std::isfinite(g.cell_h) && g.cell_h > 0.0 && std::isfinite(g.cap_h) && g.cap_h >= 0.0 &&
                       std::isfinite(g.cap_v) && g.cap_v >= 0.0;
  if (!grid_ok) add(Violation::Kind::Grid, "grid: requires nx, ny >= 1, cell size > 0 and capacities >= 0");

  std::unordered_set<std::string> seen;
  for (const Cell& c : circuit.cells) {
    if (!seen.insert(c.id).second) add(Violation::Kind::DuplicateCellId, "cell '" + c.id + "': duplicate id");
  }
  seen.clear();
  for (const Net& n : circuit.nets) {
    if (!seen.insert(n.id).second) add(Violation::Kind::DuplicateNetId, "net '" + n.id + "': duplicate id");
  }

  std::vector<bool> sized(circuit.cells.size(), true);
  for (std::size_t i = 0; i < circuit.cells.size(); ++i) {
    const Cell& c = circuit.cells[i];
    if (!(c.w >= 0.0) || !(c.h >= 0.0)) {
      sized[i] = false;
      add(Violation::Kind::NegativeSize, "cell '" + c.id + "': negative size");
      continue;
    }
    if (grid_ok && !(c.x >= 0.0 && c.y >= 0.0 && c.x + c.w <= g.width() && c.y + c.h <= g.height())) {
      add(Violation::Kind::CellOutsideGrid, "cell '" + c.id + "': footprint outside the grid extent");
    }
  }

  for (std::size_t i = 0; i < circuit.pins.size(); ++i) {
    const Pin& p = circuit.pins[i];
    if (p.cell >= circuit.cells.size()) {
      add(Violation::Kind::DanglingPin, "pin " + std::to_string(i) + ": references missing cell");
      continue;
    }
    const Cell& c = circuit.cells[p.cell];
    if (!sized[p.cell]) continue;
    if (!(p.dx >= 0.0 && p.dx <= c.w && p.dy >= 0.0 && p.dy <= c.h)) {
      add(Violation::Kind::PinOffset, "pin " + std::to_string(i) + ": offset outside cell '" + c.id + "'");
    }
  }

  for (const Net& n : circuit.nets) {
    if (n.pins.empty()) add(Violation::Kind::EmptyNet, "net '" + n.id + "': no pins");
    for (std::size_t pin : n.pins) {
      if (pin >= circuit.pins.size()) {
        add(Violation::Kind::DanglingNetPin, "net '" + n.id + "': references missing pin " + std::to_string(pin));
      }
    }
  }
  return report;
}

void require_valid(const Circuit& circuit) {
  const ValidationReport report = validate(circuit);
  if (!report.ok()) throw ValidationError("invalid circuit:\n" + report.to_string());
}

}  // namespace lhnn
