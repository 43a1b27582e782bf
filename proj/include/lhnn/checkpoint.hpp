// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lhnn/matrix.hpp"

namespace lhnn {

/// Flat named-tensor container.
///
/// Layout (all integers little-endian):
///   "LHNNCKPT"  u32 version  u64 len  metadata bytes
///   u64 count, then per tensor: u64 len  name bytes  u64 rows  u64 cols  rows*cols f64 (row-major)
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string metadata;
  std::vector<std::pair<std::string, Matrix>> tensors;

  const Matrix& at(std::string_view name) const;
};

std::string encode_checkpoint(const Checkpoint& checkpoint);

/// Throws ParseError (Syntax) on truncated or foreign data.
Checkpoint decode_checkpoint(std::string_view bytes);

}  // namespace lhnn
