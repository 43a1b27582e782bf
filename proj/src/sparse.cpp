// SPDX-License-Identifier: Apache-2.0

#include "lhnn/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "lhnn/error.hpp"
#include "lhnn/format.hpp"

namespace lhnn {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  m.col_idx_.reserve(entries.size());
  m.values_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Triplet& t = entries[i];
    if (t.row >= rows || t.col >= cols) {
      throw ShapeError("sparse entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                       ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (i > 0 && entries[i - 1].row == t.row && entries[i - 1].col == t.col) {
      throw ShapeError("duplicate sparse entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) + ")");
    }
    if (!std::isfinite(t.value)) throw ShapeError("non-finite sparse value");
    ++m.row_ptr_[t.row + 1];
    m.col_idx_.push_back(t.col);
    m.values_.push_back(t.value);
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) entries.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(entries));
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, col_idx_[k], values_[k]});
  }
  return out;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> entries = triplets();
  for (auto& t : entries) std::swap(t.row, t.col);
  return from_triplets(cols_, rows_, std::move(entries));
}

SparseMatrix SparseMatrix::scale_rows(std::span<const double> scale) const {
  if (scale.size() != rows_) throw ShapeError("scale_rows: length mismatch");
  SparseMatrix out = *this;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.values_[k] = values_[k] * scale[r];
  }
  return out;
}

std::vector<double> SparseMatrix::row_sums() const {
  std::vector<double> sums(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) sums[r] += values_[k];
  }
  return sums;
}

std::vector<double> SparseMatrix::col_sums() const {
  std::vector<double> sums(cols_, 0.0);
  for (std::size_t k = 0; k < col_idx_.size(); ++k) sums[col_idx_[k]] += values_[k];
  return sums;
}

std::string SparseMatrix::to_triplet_text() const {
  std::string out;
  for (const Triplet& t : triplets()) {
    out += std::to_string(t.row) + ' ' + std::to_string(t.col) + ' ' + format_real(t.value) + '\n';
  }
  return out;
}

}  // namespace lhnn
