// SPDX-License-Identifier: Apache-2.0

#include "lhnn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "lhnn/error.hpp"

namespace lhnn {

namespace {

constexpr std::string_view kMagic = "LHNNCKPT";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() { return little(8); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(little(4)); }

  std::string_view take(std::uint64_t n) {
    if (n > bytes_.size() - pos_) fail("truncated checkpoint");
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(ParseError::Kind::Syntax, 0, pos_, what);
  }

 private:
  std::uint64_t little(int n) {
    std::string_view s = take(static_cast<std::uint64_t>(n));
    std::uint64_t v = 0;
    for (int i = n - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[i]);
    return v;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const Matrix& Checkpoint::at(std::string_view name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return m;
  }
  throw ConfigError("checkpoint has no tensor '" + std::string(name) + "'");
}

std::string encode_checkpoint(const Checkpoint& checkpoint) {
  std::string out(kMagic);
  put_u32(out, Checkpoint::kVersion);
  put_u64(out, checkpoint.metadata.size());
  out += checkpoint.metadata;
  put_u64(out, checkpoint.tensors.size());
  for (const auto& [name, m] : checkpoint.tensors) {
    put_u64(out, name.size());
    out += name;
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(m.data()[i]));
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size()) != kMagic) in.fail("not a checkpoint (bad magic)");
  const std::uint32_t version = in.u32();
  if (version != Checkpoint::kVersion) in.fail("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.metadata = std::string(in.take(in.u64()));
  const std::uint64_t count = in.u64();
  for (std::uint64_t t = 0; t < count; ++t) {
    std::string name(in.take(in.u64()));
    const std::uint64_t rows = in.u64();
    const std::uint64_t cols = in.u64();
    if (cols != 0 && rows > (bytes.size() / 8) / cols) in.fail("tensor '" + name + "' larger than the file");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::bit_cast<double>(in.u64());
    ckpt.tensors.emplace_back(std::move(name), std::move(m));
  }
  if (!in.done()) in.fail("trailing bytes after checkpoint");
  return ckpt;
}

}  // namespace lhnn
