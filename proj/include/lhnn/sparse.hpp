// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lhnn {

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
  bool operator==(const Triplet&) const = default;
};

/// Immutable compressed-row sparse matrix. Entries are kept in canonical
/// row-major order (row, then column) with no duplicate coordinates.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Sorts into canonical order. Duplicate coordinates or non-finite values throw.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return col_idx_.size(); }

  std::span<const std::size_t> row_cols(std::size_t row) const {
    return {col_idx_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
  }
  std::span<const double> row_values(std::size_t row) const {
    return {values_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
  }

  std::vector<Triplet> triplets() const;
  SparseMatrix transpose() const;
  /// Multiplies row i by scale[i].
  SparseMatrix scale_rows(std::span<const double> scale) const;

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;

  /// "row col value" per line in canonical order.
  std::string to_triplet_text() const;

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

}  // namespace lhnn
