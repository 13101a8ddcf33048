#include "ipqp/kkt.hpp"

#include <cmath>
#include <string>

#include "ipqp/vec.hpp"

namespace ipqp {

KktOperator::KktOperator(std::shared_ptr<const SymmetricOperator> hessian,
                         std::shared_ptr<const CsrMatrix> constraints,
                         std::vector<Index> lower_rows, std::vector<Index> upper_rows)
    : SymmetricOperator(hessian->dim() + lower_rows.size() + upper_rows.size(),
                        // A v_x, the combined row weights, A^T z, Hessian scratch
                        2 * constraints->rows() + hessian->dim() + hessian->scratch_size()),
      hessian_(std::move(hessian)),
      a_(std::move(constraints)),
      lower_rows_(std::move(lower_rows)),
      upper_rows_(std::move(upper_rows)),
      n_(hessian_->dim()),
      m_(a_->rows()),
      q_extra_(n_, 0.0),
      d_lower_(lower_rows_.size(), 1.0),
      d_upper_(upper_rows_.size(), 1.0),
      inv_d_lower_(lower_rows_.size(), 1.0),
      inv_d_upper_(upper_rows_.size(), 1.0) {
  require(a_->cols() == n_, "kkt: constraint matrix column count differs from Hessian size");
  for (Index i : lower_rows_) require(i < m_, "kkt: lower row index out of range");
  for (Index i : upper_rows_) require(i < m_, "kkt: upper row index out of range");
}

void KktOperator::update_diagonals(std::span<const double> q_extra,
                                   std::span<const double> d_lower,
                                   std::span<const double> d_upper) {
  require(q_extra.size() == n_ && d_lower.size() == m_lower() && d_upper.size() == m_upper(),
          "kkt update_diagonals: dimension mismatch");
  for (double v : q_extra) {
    if (!(std::isfinite(v) && v >= 0.0)) throw InteriorError("kkt: invalid Q diagonal term");
  }
  for (double v : d_lower) {
    if (!(std::isfinite(v) && v > 0.0)) throw InteriorError("kkt: non-positive D entry");
  }
  for (double v : d_upper) {
    if (!(std::isfinite(v) && v > 0.0)) throw InteriorError("kkt: non-positive D entry");
  }
  std::copy(q_extra.begin(), q_extra.end(), q_extra_.begin());
  std::copy(d_lower.begin(), d_lower.end(), d_lower_.begin());
  std::copy(d_upper.begin(), d_upper.end(), d_upper_.begin());
  for (Index k = 0; k < d_lower_.size(); ++k) inv_d_lower_[k] = 1.0 / d_lower_[k];
  for (Index k = 0; k < d_upper_.size(); ++k) inv_d_upper_[k] = 1.0 / d_upper_[k];
}

void KktOperator::do_apply(std::span<const double> v, std::span<double> out,
                           std::span<double> scratch) const {
  const Index ml = m_lower();
  const auto vx = v.first(n_);
  const auto vl = v.subspan(n_, ml);
  const auto vu = v.subspan(n_ + ml);
  auto top = out.first(n_);
  auto midl = out.subspan(n_, ml);
  auto midu = out.subspan(n_ + ml);

  auto ax = scratch.first(m_);
  auto z = scratch.subspan(m_, m_);
  auto atz = scratch.subspan(2 * m_, n_);
  auto hess_scratch = scratch.subspan(2 * m_ + n_);

  hessian_->apply(vx, top, hess_scratch);
  for (Index j = 0; j < n_; ++j) top[j] += q_extra_[j] * vx[j];

  if (m_ == 0) return;

  // A v_x once; it feeds both the B rows and the 2 B^T D^-1 B term.
  a_->apply(vx, ax);
  std::fill(z.begin(), z.end(), 0.0);
  for (Index k = 0; k < ml; ++k) {
    const Index i = lower_rows_[k];
    midl[k] = ax[i] + d_lower_[k] * vl[k];
    z[i] += 2.0 * inv_d_lower_[k] * ax[i] + vl[k];
  }
  for (Index k = 0; k < upper_rows_.size(); ++k) {
    const Index i = upper_rows_[k];
    midu[k] = -ax[i] + d_upper_[k] * vu[k];
    z[i] += 2.0 * inv_d_upper_[k] * ax[i] - vu[k];
  }
  a_->apply_transpose(z, atz);
  vec::axpy(1.0, atz, top);
}

Vector KktOperator::jacobi_diagonal() const {
  Vector diag(dim());
  const Vector h = hessian_->diagonal();
  Vector w(m_, 0.0);
  for (Index k = 0; k < m_lower(); ++k) w[lower_rows_[k]] += 2.0 * inv_d_lower_[k];
  for (Index k = 0; k < m_upper(); ++k) w[upper_rows_[k]] += 2.0 * inv_d_upper_[k];
  Vector colsq(n_, 0.0);
  if (m_ > 0) a_->weighted_column_squares(w, colsq);
  for (Index j = 0; j < n_; ++j) diag[j] = h[j] + q_extra_[j] + colsq[j];
  std::copy(d_lower_.begin(), d_lower_.end(), diag.begin() + n_);
  std::copy(d_upper_.begin(), d_upper_.end(), diag.begin() + n_ + m_lower());
  for (Index j = 0; j < diag.size(); ++j) {
    if (!(diag[j] > 0.0) || !std::isfinite(diag[j])) {
      throw InteriorError("kkt: non-positive diagonal entry " + std::to_string(j));
    }
  }
  return diag;
}

Vector KktOperator::augmented_rhs(const ReducedRhs& rhs) const {
  require(rhs.r1.size() == n_ && rhs.r2.size() == m_lower() + m_upper(),
          "kkt augmented_rhs: dimension mismatch");
  Vector out(dim());
  std::copy(rhs.r1.begin(), rhs.r1.end(), out.begin());
  std::copy(rhs.r2.begin(), rhs.r2.end(), out.begin() + n_);
  if (m_ == 0) return out;
  Vector z(m_, 0.0);
  for (Index k = 0; k < m_lower(); ++k) {
    z[lower_rows_[k]] += 2.0 * inv_d_lower_[k] * rhs.r2[k];
  }
  for (Index k = 0; k < m_upper(); ++k) {
    z[upper_rows_[k]] -= 2.0 * inv_d_upper_[k] * rhs.r2[m_lower() + k];
  }
  const Vector atz = a_->apply_transpose(z);
  vec::axpy(1.0, atz, std::span<double>(out).first(n_));
  return out;
}

IterateDiagonals iterate_diagonals(const IterateState& it, const BoundLayout& layout, Index n) {
  IterateDiagonals d;
  d.q_extra.assign(n, 0.0);
  for (Index k = 0; k < layout.var_lower.size(); ++k) {
    d.q_extra[layout.var_lower[k]] += it.mult.var_lower[k] / it.slack.var_lower[k];
  }
  for (Index k = 0; k < layout.var_upper.size(); ++k) {
    d.q_extra[layout.var_upper[k]] += it.mult.var_upper[k] / it.slack.var_upper[k];
  }
  d.d_lower.resize(layout.lin_lower.size());
  for (Index k = 0; k < d.d_lower.size(); ++k) {
    d.d_lower[k] = it.slack.lin_lower[k] / it.mult.lin_lower[k];
  }
  d.d_upper.resize(layout.lin_upper.size());
  for (Index k = 0; k < d.d_upper.size(); ++k) {
    d.d_upper[k] = it.slack.lin_upper[k] / it.mult.lin_upper[k];
  }
  return d;
}

ReducedRhs reduce_residuals(const ResidualSet& res, const IterateState& it,
                            const BoundLayout& layout) {
  const auto guard = [](double v) {
    if (!(v > 0.0)) throw InteriorError("reduce_residuals: zero or negative slack/multiplier");
    return v;
  };
  ReducedRhs out;
  out.r1.resize(res.dual.size());
  for (Index j = 0; j < res.dual.size(); ++j) out.r1[j] = -res.dual[j];
  for (Index k = 0; k < layout.var_lower.size(); ++k) {
    const double s = guard(it.slack.var_lower[k]);
    const double lam = guard(it.mult.var_lower[k]);
    out.r1[layout.var_lower[k]] -= (lam * res.primal.var_lower[k] + res.comp.var_lower[k]) / s;
  }
  for (Index k = 0; k < layout.var_upper.size(); ++k) {
    const double s = guard(it.slack.var_upper[k]);
    const double lam = guard(it.mult.var_upper[k]);
    out.r1[layout.var_upper[k]] += (lam * res.primal.var_upper[k] + res.comp.var_upper[k]) / s;
  }
  const Index ml = layout.lin_lower.size();
  out.r2.resize(ml + layout.lin_upper.size());
  for (Index k = 0; k < ml; ++k) {
    guard(it.slack.lin_lower[k]);
    out.r2[k] = -res.primal.lin_lower[k] - res.comp.lin_lower[k] / guard(it.mult.lin_lower[k]);
  }
  for (Index k = 0; k < layout.lin_upper.size(); ++k) {
    guard(it.slack.lin_upper[k]);
    out.r2[ml + k] =
        -res.primal.lin_upper[k] - res.comp.lin_upper[k] / guard(it.mult.lin_upper[k]);
  }
  return out;
}

}  // namespace ipqp
