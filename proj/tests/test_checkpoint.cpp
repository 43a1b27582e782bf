// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>

#include "lhnn/checkpoint.hpp"
#include "lhnn/error.hpp"

namespace lhnn {
namespace {

Checkpoint sample() {
  Checkpoint c;
  c.metadata = "model = test\nx = 1\n";
  Matrix a(2, 3);
  a << 1, -2, 3.5, 0, 1e-300, -0.0;
  c.tensors.emplace_back("a", a);
  c.tensors.emplace_back("empty", Matrix(0, 4));
  c.tensors.emplace_back("b.w", Matrix::Constant(1, 1, 0.1));
  return c;
}

void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

TEST(Checkpoint, RoundTrip) {
  const Checkpoint c = sample();
  const std::string bytes = encode_checkpoint(c);
  const Checkpoint back = decode_checkpoint(bytes);
  EXPECT_EQ(back.metadata, c.metadata);
  ASSERT_EQ(back.tensors.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.tensors[i].first, c.tensors[i].first);
    EXPECT_EQ(back.tensors[i].second.rows(), c.tensors[i].second.rows());
    EXPECT_EQ(back.tensors[i].second.cols(), c.tensors[i].second.cols());
    EXPECT_EQ(std::memcmp(back.tensors[i].second.data(), c.tensors[i].second.data(),
                          sizeof(double) * static_cast<std::size_t>(c.tensors[i].second.size())),
              0);
  }
  EXPECT_EQ(encode_checkpoint(back), bytes);
  EXPECT_EQ(back.at("b.w")(0, 0), 0.1);
  EXPECT_THROW(back.at("nope"), Error);
}

TEST(Checkpoint, ByteLayout) {
  Checkpoint c;
  c.metadata = "m";
  c.tensors.emplace_back("w", Matrix::Constant(1, 2, 2.0));
  std::string want = "LHNNCKPT";
  want += std::string("\x01\x00\x00\x00", 4);
  put_u64(want, 1);
  want += "m";
  put_u64(want, 1);
  put_u64(want, 1);
  want += "w";
  put_u64(want, 1);
  put_u64(want, 2);
  // 2.0 = 0x4000000000000000
  for (int k = 0; k < 2; ++k) put_u64(want, 0x4000000000000000ULL);
  EXPECT_EQ(encode_checkpoint(c), want);
}

TEST(Checkpoint, EveryTruncationFails) {
  const std::string bytes = encode_checkpoint(sample());
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    EXPECT_THROW(decode_checkpoint(std::string_view(bytes).substr(0, n)), ParseError) << n;
  }
}

TEST(Checkpoint, ForeignData) {
  std::string bytes = encode_checkpoint(sample());
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad_magic), ParseError);
  std::string bad_version = bytes;
  bad_version[8] = 9;
  EXPECT_THROW(decode_checkpoint(bad_version), ParseError);
  EXPECT_THROW(decode_checkpoint(bytes + "x"), ParseError);
  EXPECT_THROW(decode_checkpoint("hello"), ParseError);
}

}  // namespace
}  // namespace lhnn
