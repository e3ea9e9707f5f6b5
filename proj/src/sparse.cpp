#include "stochlp/sparse.hpp"

#include <algorithm>

#include "stochlp/error.hpp"

namespace stochlp {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), col_start_(cols + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw Error(ErrorCode::DimensionMismatch,
                  "triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                      ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  SparseMatrix m(rows, cols);
  std::vector<std::size_t> counts(cols, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    const std::size_t r = triplets[k].row;
    const std::size_t c = triplets[k].col;
    double sum = 0.0;
    while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
      sum += triplets[k].value;
      ++k;
    }
    if (sum != 0.0) {
      m.row_index_.push_back(r);
      m.values_.push_back(sum);
      ++counts[c];
    }
  }
  for (std::size_t c = 0; c < cols; ++c) m.col_start_[c + 1] = m.col_start_[c] + counts[c];
  return m;
}

SparseMatrix SparseMatrix::from_dense(const std::vector<std::vector<double>>& rows) {
  const std::size_t nrows = rows.size();
  const std::size_t ncols = nrows == 0 ? 0 : rows.front().size();
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < nrows; ++i) {
    if (rows[i].size() != ncols) {
      throw Error(ErrorCode::DimensionMismatch, "ragged dense matrix at row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < ncols; ++j) {
      if (rows[i][j] != 0.0) t.push_back({i, j, rows[i][j]});
    }
  }
  return from_triplets(nrows, ncols, std::move(t));
}

std::span<const std::size_t> SparseMatrix::col_rows(std::size_t col) const {
  return {row_index_.data() + col_start_[col], col_start_[col + 1] - col_start_[col]};
}

std::span<const double> SparseMatrix::col_values(std::size_t col) const {
  return {values_.data() + col_start_[col], col_start_[col + 1] - col_start_[col]};
}

double SparseMatrix::coeff(std::size_t row, std::size_t col) const {
  const auto r = col_rows(col);
  const auto it = std::lower_bound(r.begin(), r.end(), row);
  if (it == r.end() || *it != row) return 0.0;
  return values_[col_start_[col] + static_cast<std::size_t>(it - r.begin())];
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) {
    throw Error(ErrorCode::DimensionMismatch, "multiply: vector length " + std::to_string(x.size()) +
                                                  ", expected " + std::to_string(cols_));
  }
  std::vector<double> y(rows_, 0.0);
  for (std::size_t c = 0; c < cols_; ++c) {
    if (x[c] == 0.0) continue;
    for (std::size_t k = col_start_[c]; k < col_start_[c + 1]; ++k) y[row_index_[k]] += values_[k] * x[c];
  }
  return y;
}

std::vector<double> SparseMatrix::transpose_multiply(std::span<const double> w) const {
  if (w.size() != rows_) {
    throw Error(ErrorCode::DimensionMismatch,
                "transpose_multiply: vector length " + std::to_string(w.size()) + ", expected " +
                    std::to_string(rows_));
  }
  std::vector<double> y(cols_, 0.0);
  for (std::size_t c = 0; c < cols_; ++c) y[c] = column_dot(c, w);
  return y;
}

double SparseMatrix::column_dot(std::size_t col, std::span<const double> w) const {
  double s = 0.0;
  for (std::size_t k = col_start_[col]; k < col_start_[col + 1]; ++k) s += values_[k] * w[row_index_[k]];
  return s;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (std::size_t c = 0; c < cols_; ++c) {
    for (std::size_t k = col_start_[c]; k < col_start_[c + 1]; ++k) t.push_back({row_index_[k], c, values_[k]});
  }
  return t;
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
  std::vector<std::vector<double>> d(rows_, std::vector<double>(cols_, 0.0));
  for (const auto& t : triplets()) d[t.row][t.col] = t.value;
  return d;
}

void TripletBuilder::add(std::size_t row, std::size_t col, double value) {
  if (row >= rows_ || col >= cols_) {
    throw Error(ErrorCode::DimensionMismatch, "builder entry outside matrix bounds");
  }
  if (value != 0.0) entries_.push_back({row, col, value});
}

void TripletBuilder::add_block(const SparseMatrix& block, std::size_t row_offset,
                               std::size_t col_offset, double scale) {
  for (std::size_t c = 0; c < block.cols(); ++c) {
    const auto rows = block.col_rows(c);
    const auto vals = block.col_values(c);
    for (std::size_t k = 0; k < rows.size(); ++k) add(rows[k] + row_offset, c + col_offset, vals[k] * scale);
  }
}

SparseMatrix TripletBuilder::build() && {
  return SparseMatrix::from_triplets(rows_, cols_, std::move(entries_));
}

}  // namespace stochlp
