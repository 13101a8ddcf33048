#include <cmath>

#include "ipqp/linops.hpp"
#include "ipqp/vec.hpp"

namespace ipqp {

BfgsOperator::BfgsOperator(Vector h0_diag)
    : BfgsOperator(std::move(h0_diag), Vector{}, Vector{}) {}

BfgsOperator::BfgsOperator(Vector h0_diag, Vector columns, Vector weights)
    : SymmetricOperator(h0_diag.size(), weights.size()),
      h0_(std::move(h0_diag)),
      columns_(std::move(columns)),
      weights_(std::move(weights)) {
  const Index n = h0_.size();
  require(columns_.size() == n * weights_.size(), "bfgs: expected n values per column");
  for (double h : h0_) {
    require(std::isfinite(h) && h > 0.0, "bfgs: H0 diagonal must be positive and finite");
  }
  for (double w : weights_) {
    require(std::isfinite(w) && w != 0.0, "bfgs: weights must be finite and nonzero");
  }
  require(vec::all_finite(columns_), "bfgs: non-finite update column");
}

std::span<const double> BfgsOperator::column(Index k) const {
  require(k < column_count(), "bfgs: column index out of range");
  return std::span<const double>(columns_).subspan(k * dim(), dim());
}

void BfgsOperator::do_apply(std::span<const double> x, std::span<double> y,
                            std::span<double> scratch) const {
  const Index n = dim();
  const Index cols = column_count();
  for (Index i = 0; i < n; ++i) y[i] = h0_[i] * x[i];
  // t = W (U^T x), then y += U t
  for (Index k = 0; k < cols; ++k) {
    scratch[k] = weights_[k] * vec::dot(column(k), x);
  }
  for (Index k = 0; k < cols; ++k) {
    vec::axpy(scratch[k], column(k), y);
  }
}

Vector BfgsOperator::diagonal() const {
  std::call_once(diagonal_once_, [this] {
    const Index n = dim();
    diagonal_ = h0_;
    for (Index k = 0; k < column_count(); ++k) {
      const auto u = column(k);
      const double w = weights_[k];
      for (Index j = 0; j < n; ++j) diagonal_[j] += w * u[j] * u[j];
    }
  });
  return diagonal_;
}

std::shared_ptr<const BfgsOperator> BfgsOperator::with_pair(std::span<const double> u1,
                                                            double w1,
                                                            std::span<const double> u2,
                                                            double w2) const {
  require(u1.size() == dim() && u2.size() == dim(), "bfgs with_pair: dimension mismatch");
  Vector cols;
  cols.reserve(columns_.size() + 2 * dim());
  cols.insert(cols.end(), columns_.begin(), columns_.end());
  cols.insert(cols.end(), u1.begin(), u1.end());
  cols.insert(cols.end(), u2.begin(), u2.end());
  Vector w = weights_;
  w.push_back(w1);
  w.push_back(w2);
  return std::make_shared<const BfgsOperator>(h0_, std::move(cols), std::move(w));
}

}  // namespace ipqp
