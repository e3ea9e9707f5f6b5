#ifndef STOCHLP_SPARSE_HPP
#define STOCHLP_SPARSE_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace stochlp {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed-column sparse matrix. Entries within a column are sorted by row
/// and duplicates from the builder are summed. Explicit zeros are dropped.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);

  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix from_dense(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const std::size_t> col_rows(std::size_t col) const;
  std::span<const double> col_values(std::size_t col) const;

  double coeff(std::size_t row, std::size_t col) const;

  /// y = A x
  std::vector<double> multiply(std::span<const double> x) const;
  /// y = A^T w
  std::vector<double> transpose_multiply(std::span<const double> w) const;
  /// A^T w restricted to one column.
  double column_dot(std::size_t col, std::span<const double> w) const;

  std::vector<Triplet> triplets() const;
  std::vector<std::vector<double>> to_dense() const;

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> col_start_{0};
  std::vector<std::size_t> row_index_;
  std::vector<double> values_;
};

/// Accumulates triplets for an eventual SparseMatrix; the block-assembly
/// helpers keep scenario blocks from ever being densified.
class TripletBuilder {
 public:
  TripletBuilder(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

  void add(std::size_t row, std::size_t col, double value);
  void add_block(const SparseMatrix& block, std::size_t row_offset,
                 std::size_t col_offset, double scale = 1.0);

  SparseMatrix build() &&;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Triplet> entries_;
};

}  // namespace stochlp

#endif  // STOCHLP_SPARSE_HPP
