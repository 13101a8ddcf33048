#pragma once

#include <memory>
#include <span>

#include "ipqp/iterate.hpp"
#include "ipqp/linops.hpp"

namespace ipqp {

/// Right-hand side (r1, r2) of the reduced 2x2 system
///
///   [ Q  -B^T ] [dx      ]   [r1]
///   [ B   D   ] [dlam_A  ] = [r2]
///
/// with r2 = (r2_lower, r2_upper) stacked.
struct ReducedRhs {
  Vector r1;
  Vector r2;
};

/// Unassembled doubly augmented KKT operator
///
///   [ Q + 2 B^T D^-1 B   B^T ]
///   [ B                  D   ]
///
/// where Q = H + diag(q_extra), B = [A_L; -A_U] and D = diag(d_lower, d_upper).
/// A_L / A_U are the rows of A with a finite lower / upper side; B is never
/// stored, only A and its transpose.
class KktOperator final : public SymmetricOperator {
 public:
  KktOperator(std::shared_ptr<const SymmetricOperator> hessian,
              std::shared_ptr<const CsrMatrix> constraints, std::vector<Index> lower_rows,
              std::vector<Index> upper_rows);

  Index n() const noexcept { return n_; }
  Index m_lower() const noexcept { return lower_rows_.size(); }
  Index m_upper() const noexcept { return upper_rows_.size(); }

  std::span<const double> q_extra() const noexcept { return q_extra_; }
  std::span<const double> d_lower() const noexcept { return d_lower_; }
  std::span<const double> d_upper() const noexcept { return d_upper_; }
  std::span<const Index> lower_rows() const noexcept { return lower_rows_; }
  std::span<const Index> upper_rows() const noexcept { return upper_rows_; }

  /// Replaces the iterate-dependent diagonals. Every entry of d_lower and
  /// d_upper must be positive, q_extra nonnegative, all finite.
  void update_diagonals(std::span<const double> q_extra, std::span<const double> d_lower,
                        std::span<const double> d_upper);

  /// Exact diagonal of the operator; used as the Jacobi preconditioner.
  /// Throws InteriorError on a non-positive entry.
  Vector jacobi_diagonal() const;
  Vector diagonal() const override { return jacobi_diagonal(); }

  /// (r1 + 2 B^T D^-1 r2, r2)
  Vector augmented_rhs(const ReducedRhs& rhs) const;

 protected:
  void do_apply(std::span<const double> v, std::span<double> out,
                std::span<double> scratch) const override;

 private:
  std::shared_ptr<const SymmetricOperator> hessian_;
  std::shared_ptr<const CsrMatrix> a_;
  std::vector<Index> lower_rows_;
  std::vector<Index> upper_rows_;
  Index n_;
  Index m_;
  Vector q_extra_;
  Vector d_lower_;
  Vector d_upper_;
  // Precomputed reciprocals of d_lower_ / d_upper_.
  Vector inv_d_lower_;
  Vector inv_d_upper_;
};

/// Diagonal blocks for the current iterate: q_extra (S^-1 Lambda summed over
/// the variable bound families) and D = Lambda^-1 S for the linear families.
struct IterateDiagonals {
  Vector q_extra;
  Vector d_lower;
  Vector d_upper;
};
IterateDiagonals iterate_diagonals(const IterateState& it, const BoundLayout& layout, Index n);

/// Block elimination of the full Newton residuals down to (r1, r2):
///
///   r1 = -r_H - S_lx^-1 (Lam_lx r_lx + rc_lx) + S_ux^-1 (Lam_ux r_ux + rc_ux)
///   r2 = (-r_lA - Lam_lA^-1 rc_lA,  -r_uA - Lam_uA^-1 rc_uA)
///
/// Throws InteriorError on a zero slack or multiplier.
ReducedRhs reduce_residuals(const ResidualSet& residuals, const IterateState& it,
                            const BoundLayout& layout);

}  // namespace ipqp
