// SPDX-License-Identifier: Apache-2.0

#include "lhnn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "lhnn/error.hpp"
#include "lhnn/format.hpp"

namespace lhnn {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, std::size_t col) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(ParseError::Kind::Syntax, line, col, "bad number '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

bool MapTable::has(std::string_view name) const {
  return std::any_of(columns.begin(), columns.end(), [&](const auto& c) { return c.first == name; });
}

const Plane& MapTable::column(std::string_view name) const {
  for (const auto& [n, p] : columns) {
    if (n == name) return p;
  }
  throw ConfigError("map table has no column '" + std::string(name) + "'");
}

void MapTable::add(std::string name, Plane plane) {
  if (plane.size() != nx * ny) throw ShapeError("column '" + name + "' does not match the grid");
  columns.emplace_back(std::move(name), std::move(plane));
}

Matrix MapTable::matrix(const std::vector<std::string>& names) const {
  Matrix m(static_cast<Eigen::Index>(nx * ny), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    const Plane& p = column(names[j]);
    for (std::size_t i = 0; i < p.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[i];
  }
  return m;
}

MapTable table_from(const FeatureMap& features) {
  MapTable t{features.nx, features.ny, {}};
  for (const auto& [name, plane] : features.channels) t.add(name, plane);
  return t;
}

MapTable table_from(const LabeledMaps& labels) {
  MapTable t{labels.nx, labels.ny, {}};
  t.add("demand_h", labels.demand_h);
  t.add("demand_v", labels.demand_v);
  t.add("cong_h", labels.cong_h);
  t.add("cong_v", labels.cong_v);
  return t;
}

std::string table_to_csv(const MapTable& table) {
  std::string out = "gcell,col,row";
  for (const auto& c : table.columns) out += "," + c.first;
  out += '\n';
  for (std::size_t i = 0; i < table.nx * table.ny; ++i) {
    out += std::to_string(i) + ',' + std::to_string(i % table.nx) + ',' + std::to_string(i / table.nx);
    for (const auto& c : table.columns) out += ',' + format_significant(c.second[i], 9);
    out += '\n';
  }
  return out;
}

MapTable table_from_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(ParseError::Kind::Syntax, 1, 1, "empty map table");

  const auto header = split_commas(lines[0]);
  if (header.size() < 3 || header[0] != "gcell" || header[1] != "col" || header[2] != "row") {
    throw ParseError(ParseError::Kind::Syntax, 1, 1, "map table header must start with gcell,col,row");
  }
  const std::size_t n = lines.size() - 1;
  std::vector<Plane> planes(header.size() - 3, Plane(n));
  std::size_t nx = 0;
  std::size_t ny = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lineno = i + 2;
    const auto fields = split_commas(lines[i + 1]);
    if (fields.size() != header.size()) {
      throw ParseError(ParseError::Kind::Syntax, lineno, 1, "expected " + std::to_string(header.size()) + " fields");
    }
    if (parse_number<std::size_t>(fields[0], lineno, 1) != i) {
      throw ParseError(ParseError::Kind::Syntax, lineno, 1, "G-cells out of order");
    }
    nx = std::max(nx, parse_number<std::size_t>(fields[1], lineno, 2) + 1);
    ny = std::max(ny, parse_number<std::size_t>(fields[2], lineno, 3) + 1);
    for (std::size_t j = 0; j < planes.size(); ++j) planes[j][i] = parse_number<double>(fields[j + 3], lineno, j + 4);
  }
  if (nx * ny != n) throw ParseError(ParseError::Kind::Syntax, 1, 1, "rows do not cover a full grid");
  for (std::size_t i = 0; i < n; ++i) {
    const auto fields = split_commas(lines[i + 1]);
    if (parse_number<std::size_t>(fields[1], i + 2, 2) != i % nx) {
      throw ParseError(ParseError::Kind::Syntax, i + 2, 2, "column does not match the G-cell index");
    }
  }
  MapTable t{nx, ny, {}};
  for (std::size_t j = 0; j < planes.size(); ++j) t.add(std::string(header[j + 3]), std::move(planes[j]));
  return t;
}

std::string plane_to_pgm(const Plane& plane, std::size_t nx, std::size_t ny, PgmScale* scale) {
  if (plane.size() != nx * ny) throw ShapeError("plane does not match the grid");
  PgmScale s;
  if (!plane.empty()) {
    const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
    s = {*lo, *hi};
  }
  if (scale != nullptr) *scale = s;
  const double range = s.max - s.min;
  std::string out = "P2\n" + std::to_string(nx) + ' ' + std::to_string(ny) + "\n255\n";
  for (std::size_t r = ny; r-- > 0;) {
    for (std::size_t c = 0; c < nx; ++c) {
      const double v = plane[r * nx + c];
      const long level = range > 0 ? std::lround(255.0 * (v - s.min) / range) : 0;
      if (c > 0) out += ' ';
      out += std::to_string(level);
    }
    out += '\n';
  }
  return out;
}

void RunManifest::add_input(const std::string& path) { inputs.emplace_back(path, hex64(fnv1a64(read_file(path)))); }

std::string RunManifest::to_text() const {
  std::string out = "[run]\n";
  out += "command = " + command + "\n";
  out += "toolkit_version = " + std::string(kToolkitVersion) + "\n";
  out += "seed = " + std::to_string(seed) + "\n";
  for (const auto& [path, hash] : inputs) out += "input = " + path + " fnv1a64:" + hash + "\n";
  for (const auto& path : outputs) out += "output = " + path + "\n";
  for (const auto& [name, s] : pgm_scales) {
    out += "pgm_scale = " + name + " " + format_real(s.min) + " " + format_real(s.max) + "\n";
  }
  out += "seconds = " + format_significant(seconds, 6) + "\n";
  out += "exit_code = " + std::to_string(exit_code) + "\n";
  if (!diagnostic.empty()) out += "diagnostic = " + diagnostic + "\n";
  if (!config.empty()) {
    out += "config:\n";
    std::size_t start = 0;
    while (start < config.size()) {
      std::size_t end = config.find('\n', start);
      if (end == std::string::npos) end = config.size();
      out += "  " + config.substr(start, end - start) + "\n";
      start = end + 1;
    }
  }
  return out;
}

void append_manifest(const std::string& path, const RunManifest& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open manifest '" + path + "'");
  out << manifest.to_text();
  if (!out) throw IoError("failed writing manifest '" + path + "'");
}

}  // namespace lhnn
