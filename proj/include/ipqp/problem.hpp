#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>

#include "ipqp/linops.hpp"

namespace ipqp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A problem failed validation. field() names the offending entry, e.g.
/// "lin_lower[3]".
class ProblemError : public ContractError {
 public:
  ProblemError(std::string field, const std::string& message)
      : ContractError(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Convex QP
///
///   min 1/2 x^T H x + p^T x   s.t.  l <= A x <= u,  a <= x <= b
///
/// Bounds may be infinite. Validated on construction and immutable after.
class QpProblem {
 public:
  QpProblem(std::shared_ptr<const SymmetricOperator> hessian, Vector linear_term,
            std::shared_ptr<const CsrMatrix> constraints, Vector lin_lower, Vector lin_upper,
            Vector var_lower, Vector var_upper);

  Index n() const noexcept { return linear_term_.size(); }
  Index m() const noexcept { return constraints_->rows(); }

  const SymmetricOperator& hessian() const noexcept { return *hessian_; }
  const std::shared_ptr<const SymmetricOperator>& hessian_ptr() const noexcept {
    return hessian_;
  }
  const CsrMatrix& constraints() const noexcept { return *constraints_; }
  const std::shared_ptr<const CsrMatrix>& constraints_ptr() const noexcept {
    return constraints_;
  }
  std::span<const double> linear_term() const noexcept { return linear_term_; }
  std::span<const double> lin_lower() const noexcept { return lin_lower_; }
  std::span<const double> lin_upper() const noexcept { return lin_upper_; }
  std::span<const double> var_lower() const noexcept { return var_lower_; }
  std::span<const double> var_upper() const noexcept { return var_upper_; }

  double objective(std::span<const double> x) const;

 private:
  std::shared_ptr<const SymmetricOperator> hessian_;
  Vector linear_term_;
  std::shared_ptr<const CsrMatrix> constraints_;
  Vector lin_lower_, lin_upper_, var_lower_, var_upper_;
};

/// Which rows / variables carry a finite bound. Slack, multiplier and residual
/// vectors of each family are indexed through these lists.
struct BoundLayout {
  std::vector<Index> lin_lower;  // rows i with finite l_i
  std::vector<Index> lin_upper;  // rows i with finite u_i
  std::vector<Index> var_lower;  // variables j with finite a_j
  std::vector<Index> var_upper;  // variables j with finite b_j

  Index total() const noexcept {
    return lin_lower.size() + lin_upper.size() + var_lower.size() + var_upper.size();
  }
  /// Variables with at least one finite bound (a two-sided box counts once).
  Index bounded_variables = 0;

  static BoundLayout of(const QpProblem& problem);
};

}  // namespace ipqp
