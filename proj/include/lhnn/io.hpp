// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lhnn/eval.hpp"
#include "lhnn/features.hpp"
#include "lhnn/matrix.hpp"

namespace lhnn {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

/// Named per-G-cell planes on an nx x ny grid.
struct MapTable {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::pair<std::string, Plane>> columns;

  bool has(std::string_view name) const;
  const Plane& column(std::string_view name) const;
  void add(std::string name, Plane plane);

  /// Columns stacked side by side, n_gcells x names.size().
  Matrix matrix(const std::vector<std::string>& names) const;
};

MapTable table_from(const FeatureMap& features);
MapTable table_from(const LabeledMaps& labels);

/// Header "gcell,col,row,<names...>", then one line per G-cell in index
/// order with 9 significant digits.
std::string table_to_csv(const MapTable& table);

/// Throws ParseError on malformed text; G-cells must appear in index order.
MapTable table_from_csv(std::string_view text);

struct PgmScale {
  double min = 0.0;
  double max = 0.0;
};

/// Plain (P2) greymap, 0..255 min-max scaled, top image row = highest
/// G-cell row. A constant plane maps to 0.
std::string plane_to_pgm(const Plane& plane, std::size_t nx, std::size_t ny, PgmScale* scale = nullptr);

/// One record per command invocation, appended to a text log.
struct RunManifest {
  std::string command;
  std::string config;  // key = value lines, may be empty
  std::vector<std::pair<std::string, std::string>> inputs;  // path, fnv1a64 hex
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, PgmScale>> pgm_scales;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  int exit_code = 0;
  std::string diagnostic;

  void add_input(const std::string& path);  // hashes the file
  std::string to_text() const;
};

/// Appends `manifest` to `path`, creating it when missing.
void append_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace lhnn
