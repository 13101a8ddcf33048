#include <algorithm>
#include <cmath>
#include <string>

#include "ipqp/problem.hpp"
#include "ipqp/vec.hpp"

namespace ipqp {

namespace {

std::string at(const char* name, Index i) { return std::string(name) + "[" + std::to_string(i) + "]"; }

void check_pair(const char* lower_name, std::span<const double> lower, const char* upper_name,
                std::span<const double> upper) {
  for (Index i = 0; i < lower.size(); ++i) {
    const double lo = lower[i];
    const double hi = upper[i];
    if (std::isnan(lo)) throw ProblemError(at(lower_name, i), "NaN bound");
    if (std::isnan(hi)) throw ProblemError(at(upper_name, i), "NaN bound");
    if (lo == kInf) throw ProblemError(at(lower_name, i), "lower bound is +inf");
    if (hi == -kInf) throw ProblemError(at(upper_name, i), "upper bound is -inf");
    if (lo > hi) {
      throw ProblemError(at(lower_name, i), std::to_string(lo) + " exceeds " + at(upper_name, i) +
                                                " = " + std::to_string(hi));
    }
    if (lo == hi) {
      throw ProblemError(at(lower_name, i),
                         "equal lower and upper bounds are not supported (equality constraint)");
    }
  }
}

}  // namespace

QpProblem::QpProblem(std::shared_ptr<const SymmetricOperator> hessian, Vector linear_term,
                     std::shared_ptr<const CsrMatrix> constraints, Vector lin_lower,
                     Vector lin_upper, Vector var_lower, Vector var_upper)
    : hessian_(std::move(hessian)),
      linear_term_(std::move(linear_term)),
      constraints_(std::move(constraints)),
      lin_lower_(std::move(lin_lower)),
      lin_upper_(std::move(lin_upper)),
      var_lower_(std::move(var_lower)),
      var_upper_(std::move(var_upper)) {
  if (!hessian_) throw ProblemError("hessian", "missing");
  const Index n = linear_term_.size();
  if (n == 0) throw ProblemError("n", "problem has no variables");
  if (hessian_->dim() != n) {
    throw ProblemError("hessian", "dimension " + std::to_string(hessian_->dim()) +
                                      " does not match n = " + std::to_string(n));
  }
  if (!constraints_) constraints_ = std::make_shared<const CsrMatrix>(0, n);
  if (constraints_->cols() != n) {
    throw ProblemError("constraints", "has " + std::to_string(constraints_->cols()) +
                                          " columns, expected n = " + std::to_string(n));
  }
  const Index m = constraints_->rows();
  if (lin_lower_.size() != m) throw ProblemError("lin_lower", "expected m entries");
  if (lin_upper_.size() != m) throw ProblemError("lin_upper", "expected m entries");
  if (var_lower_.size() != n) throw ProblemError("var_lower", "expected n entries");
  if (var_upper_.size() != n) throw ProblemError("var_upper", "expected n entries");
  for (Index j = 0; j < n; ++j) {
    if (!std::isfinite(linear_term_[j])) throw ProblemError(at("linear_term", j), "not finite");
  }
  check_pair("lin_lower", lin_lower_, "lin_upper", lin_upper_);
  check_pair("var_lower", var_lower_, "var_upper", var_upper_);

  const auto diag = hessian_->diagonal();
  for (Index j = 0; j < n; ++j) {
    if (!(diag[j] >= 0.0)) {
      throw ProblemError(at("hessian", j), "negative diagonal entry, Hessian is not PSD");
    }
  }

  const auto finite = [](double v) { return std::isfinite(v); };
  const bool any_bound = std::any_of(lin_lower_.begin(), lin_lower_.end(), finite) ||
                         std::any_of(lin_upper_.begin(), lin_upper_.end(), finite) ||
                         std::any_of(var_lower_.begin(), var_lower_.end(), finite) ||
                         std::any_of(var_upper_.begin(), var_upper_.end(), finite);
  if (!any_bound) throw ProblemError("bounds", "problem has no finite bound");
}

double QpProblem::objective(std::span<const double> x) const {
  const Vector hx = hessian_->apply(x);
  return 0.5 * vec::dot(x, hx) + vec::dot(linear_term_, x);
}

BoundLayout BoundLayout::of(const QpProblem& problem) {
  BoundLayout layout;
  for (Index i = 0; i < problem.m(); ++i) {
    if (std::isfinite(problem.lin_lower()[i])) layout.lin_lower.push_back(i);
    if (std::isfinite(problem.lin_upper()[i])) layout.lin_upper.push_back(i);
  }
  for (Index j = 0; j < problem.n(); ++j) {
    const bool lo = std::isfinite(problem.var_lower()[j]);
    const bool hi = std::isfinite(problem.var_upper()[j]);
    if (lo) layout.var_lower.push_back(j);
    if (hi) layout.var_upper.push_back(j);
    if (lo || hi) ++layout.bounded_variables;
  }
  return layout;
}

}  // namespace ipqp
