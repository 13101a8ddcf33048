#include <algorithm>
#include <cmath>
#include <string>

#include "ipqp/linops.hpp"

namespace ipqp {

SymmetricOperator::SymmetricOperator(Index dim, Index scratch_size)
    : dim_(dim), owned_scratch_(scratch_size) {
  require(dim > 0, "operator dimension must be positive");
}

void SymmetricOperator::apply(std::span<const double> x, std::span<double> y,
                              std::span<double> scratch) const {
  require(x.size() == dim_ && y.size() == dim_, "operator apply: dimension mismatch");
  require(scratch.size() >= owned_scratch_.size(), "operator apply: scratch too small");
  do_apply(x, y, scratch);
}

void SymmetricOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (owned_scratch_.empty()) {
    apply(x, y, std::span<double>{});
    return;
  }
  std::lock_guard lock(scratch_mutex_);
  apply(x, y, std::span<double>(owned_scratch_));
}

Vector SymmetricOperator::apply(std::span<const double> x) const {
  Vector y(dim_);
  apply(x, y);
  return y;
}

DiagonalOperator::DiagonalOperator(Vector entries)
    : SymmetricOperator(entries.size(), 0), entries_(std::move(entries)) {
  for (double v : entries_) require(std::isfinite(v), "diagonal operator: non-finite entry");
}

void DiagonalOperator::do_apply(std::span<const double> x, std::span<double> y,
                                std::span<double>) const {
  for (Index i = 0; i < entries_.size(); ++i) y[i] = entries_[i] * x[i];
}

DenseSymmetricOperator::DenseSymmetricOperator(Index n, Vector row_major)
    : SymmetricOperator(n, 0), data_(std::move(row_major)) {
  require(data_.size() == n * n, "dense operator: expected n*n entries");
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) {
      if (data_[i * n + j] != data_[j * n + i]) {
        throw ContractError("dense operator: not symmetric at (" + std::to_string(i) + ", " +
                            std::to_string(j) + ")");
      }
    }
  }
}

Vector DenseSymmetricOperator::diagonal() const {
  const Index n = dim();
  Vector d(n);
  for (Index i = 0; i < n; ++i) d[i] = data_[i * n + i];
  return d;
}

void DenseSymmetricOperator::do_apply(std::span<const double> x, std::span<double> y,
                                      std::span<double>) const {
  const Index n = dim();
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    const double* row = data_.data() + i * n;
    for (Index j = 0; j < n; ++j) sum += row[j] * x[j];
    y[i] = sum;
  }
}

CsrSymmetricOperator::CsrSymmetricOperator(CsrMatrix matrix)
    : SymmetricOperator(matrix.rows(), 0), matrix_(std::move(matrix)) {
  require(matrix_.rows() == matrix_.cols(), "csr hessian: matrix must be square");
  const bool same_pattern =
      std::equal(matrix_.row_offsets().begin(), matrix_.row_offsets().end(),
                 matrix_.transpose_offsets().begin()) &&
      std::equal(matrix_.col_indices().begin(), matrix_.col_indices().end(),
                 matrix_.transpose_indices().begin());
  const bool same_values = std::equal(matrix_.values().begin(), matrix_.values().end(),
                                      matrix_.transpose_values().begin());
  require(same_pattern && same_values, "csr hessian: matrix is not symmetric");
}

Vector CsrSymmetricOperator::diagonal() const {
  Vector d(dim(), 0.0);
  const auto offsets = matrix_.row_offsets();
  const auto cols = matrix_.col_indices();
  const auto vals = matrix_.values();
  for (Index i = 0; i < dim(); ++i) {
    for (Index k = offsets[i]; k < offsets[i + 1]; ++k) {
      if (cols[k] == i) {
        d[i] = vals[k];
        break;
      }
    }
  }
  return d;
}

void CsrSymmetricOperator::do_apply(std::span<const double> x, std::span<double> y,
                                    std::span<double>) const {
  matrix_.apply(x, y);
}

}  // namespace ipqp
