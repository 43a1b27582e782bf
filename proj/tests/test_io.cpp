// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>

#include "lhnn/error.hpp"
#include "lhnn/format.hpp"
#include "lhnn/io.hpp"
#include "support.hpp"

namespace lhnn {
namespace {

MapTable small_table() {
  MapTable t{3, 2, {}};
  t.add("a", {0, 1, 2, 3, 4, 5});
  t.add("b", {0.1, 1.0 / 3.0, -2, 1e-7, 12345.678, 0});
  return t;
}

TEST(MapTable, CsvText) {
  const std::string csv = table_to_csv(small_table());
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "gcell,col,row,a,b");
  EXPECT_NE(csv.find("\n1,1,0,1,0.333333333\n"), std::string::npos);
  EXPECT_NE(csv.find("\n5,2,1,5,0\n"), std::string::npos);
}

TEST(MapTable, CsvRoundTrip) {
  const MapTable t = small_table();
  const MapTable back = table_from_csv(table_to_csv(t));
  EXPECT_EQ(back.nx, 3u);
  EXPECT_EQ(back.ny, 2u);
  EXPECT_EQ(back.column("a"), t.column("a"));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(back.column("b")[i], t.column("b")[i], 1e-8 * std::abs(t.column("b")[i]));
  EXPECT_EQ(table_to_csv(back), table_to_csv(t));
  EXPECT_EQ(back.matrix({"b", "a"})(4, 1), 4.0);
  EXPECT_THROW(back.column("c"), ConfigError);
}

TEST(MapTable, CsvErrors) {
  EXPECT_THROW(table_from_csv(""), ParseError);
  EXPECT_THROW(table_from_csv("x,col,row\n0,0,0\n"), ParseError);
  EXPECT_THROW(table_from_csv("gcell,col,row,a\n0,0,0\n"), ParseError);
  EXPECT_THROW(table_from_csv("gcell,col,row,a\n1,0,0,2\n"), ParseError);
  EXPECT_THROW(table_from_csv("gcell,col,row,a\n0,0,0,zz\n"), ParseError);
  EXPECT_THROW(table_from_csv("gcell,col,row,a\n0,0,0,1\n1,0,1,1\n2,1,0,1\n"), ParseError);
  MapTable t{2, 2, {}};
  EXPECT_THROW(t.add("x", {1, 2, 3}), ShapeError);
}

TEST(Pgm, LayoutAndScale) {
  // rows 0 then 1; the image shows row 1 first
  PgmScale s;
  EXPECT_EQ(plane_to_pgm({0, 1, 2, 4}, 2, 2, &s), "P2\n2 2\n255\n128 255\n0 64\n");
  EXPECT_EQ(s.min, 0.0);
  EXPECT_EQ(s.max, 4.0);
  EXPECT_EQ(plane_to_pgm({3, 3, 3}, 3, 1), "P2\n3 1\n255\n0 0 0\n");
  EXPECT_THROW(plane_to_pgm({1, 2}, 3, 1), ShapeError);
}

TEST(Manifest, TextAndAppend) {
  const std::string dir = testing::scratch_dir("manifest");
  const std::string in = dir + "/in.txt";
  write_file(in, "abc");
  RunManifest m;
  m.command = "gen --seed 3";
  m.seed = 3;
  m.add_input(in);
  m.outputs.push_back("out.txt");
  m.pgm_scales.push_back({"rudy", {0.0, 2.5}});
  m.exit_code = 4;
  m.diagnostic = "bad";
  m.config = "a = 1\nb = 2\n";
  const std::string text = m.to_text();
  EXPECT_EQ(text.rfind("[run]\ncommand = gen --seed 3\n", 0), 0u);
  // FNV-1a 64 of "abc"
  EXPECT_NE(text.find("input = " + in + " fnv1a64:e71fa2190541574b\n"), std::string::npos);
  EXPECT_NE(text.find("output = out.txt\n"), std::string::npos);
  EXPECT_NE(text.find("pgm_scale = rudy 0 2.5\n"), std::string::npos);
  EXPECT_NE(text.find("exit_code = 4\ndiagnostic = bad\n"), std::string::npos);
  EXPECT_NE(text.find("config:\n  a = 1\n  b = 2\n"), std::string::npos);
  EXPECT_NE(text.find("toolkit_version = 0.1.0\n"), std::string::npos);

  const std::string log = dir + "/runs.manifest";
  append_manifest(log, m);
  append_manifest(log, m);
  EXPECT_EQ(read_file(log), text + text);
  EXPECT_THROW(m.add_input(dir + "/missing"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace lhnn
