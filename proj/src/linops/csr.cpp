#include <cmath>
#include <string>

#include "ipqp/linops.hpp"

namespace ipqp {

CsrMatrix::CsrMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0), t_offsets_(cols + 1, 0) {}

CsrMatrix::CsrMatrix(Index rows, Index cols, std::vector<Index> row_offsets,
                     std::vector<Index> col_indices, Vector values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  require(row_offsets_.size() == rows_ + 1, "csr: row_offsets must have rows+1 entries");
  require(row_offsets_.front() == 0, "csr: row_offsets[0] must be 0");
  require(col_indices_.size() == values_.size(), "csr: col_indices and values differ in length");
  require(row_offsets_.back() == values_.size(), "csr: row_offsets[rows] must equal nnz");
  for (Index i = 0; i < rows_; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1]) {
      throw ContractError("csr: row_offsets decrease at row " + std::to_string(i));
    }
    for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (col_indices_[k] >= cols_) {
        throw ContractError("csr: column index out of range in row " + std::to_string(i));
      }
      if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1]) {
        throw ContractError("csr: column indices not strictly increasing in row " +
                            std::to_string(i));
      }
      if (!std::isfinite(values_[k])) {
        throw ContractError("csr: non-finite value in row " + std::to_string(i));
      }
    }
  }
  build_transpose();
}

CsrMatrix CsrMatrix::from_dense(Index rows, Index cols, std::span<const double> dense) {
  require(dense.size() == rows * cols, "csr from_dense: expected rows*cols entries");
  std::vector<Index> offsets{0};
  std::vector<Index> indices;
  Vector values;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double v = dense[i * cols + j];
      if (v != 0.0) {
        indices.push_back(j);
        values.push_back(v);
      }
    }
    offsets.push_back(values.size());
  }
  return CsrMatrix(rows, cols, std::move(offsets), std::move(indices), std::move(values));
}

void CsrMatrix::build_transpose() {
  // Counting sort by column; walking rows in order keeps each transpose row
  // sorted by original row index.
  t_offsets_.assign(cols_ + 1, 0);
  for (Index c : col_indices_) ++t_offsets_[c + 1];
  for (Index j = 0; j < cols_; ++j) t_offsets_[j + 1] += t_offsets_[j];
  t_indices_.resize(nnz());
  t_values_.resize(nnz());
  std::vector<Index> next(t_offsets_.begin(), t_offsets_.end() - 1);
  for (Index i = 0; i < rows_; ++i) {
    for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const Index dst = next[col_indices_[k]]++;
      t_indices_[dst] = i;
      t_values_[dst] = values_[k];
    }
  }
}

void CsrMatrix::apply(std::span<const double> x, std::span<double> y) const {
  require(x.size() == cols_ && y.size() == rows_, "csr apply: dimension mismatch");
  for (Index i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      sum += values_[k] * x[col_indices_[k]];
    }
    y[i] = sum;
  }
}

Vector CsrMatrix::apply(std::span<const double> x) const {
  Vector y(rows_);
  apply(x, y);
  return y;
}

void CsrMatrix::apply_transpose(std::span<const double> y, std::span<double> x) const {
  require(y.size() == rows_ && x.size() == cols_, "csr apply_transpose: dimension mismatch");
  for (Index j = 0; j < cols_; ++j) {
    double sum = 0.0;
    for (Index k = t_offsets_[j]; k < t_offsets_[j + 1]; ++k) {
      sum += t_values_[k] * y[t_indices_[k]];
    }
    x[j] = sum;
  }
}

Vector CsrMatrix::apply_transpose(std::span<const double> y) const {
  Vector x(cols_);
  apply_transpose(y, x);
  return x;
}

void CsrMatrix::weighted_column_squares(std::span<const double> w,
                                        std::span<double> out) const {
  require(w.size() == rows_ && out.size() == cols_,
          "csr weighted_column_squares: dimension mismatch");
  for (Index j = 0; j < cols_; ++j) {
    double sum = 0.0;
    for (Index k = t_offsets_[j]; k < t_offsets_[j + 1]; ++k) {
      const double a = t_values_[k];
      sum += w[t_indices_[k]] * a * a;
    }
    out[j] = sum;
  }
}

}  // namespace ipqp
