#pragma once

// Dense reference computations. These assemble matrices explicitly and are
// meant for small problems in tests and benchmarks only.

#include <Eigen/Dense>

#include "ipqp/iterate.hpp"
#include "ipqp/problem.hpp"

namespace ipqp::bench {

/// Dense copy of a Hessian read from its stored representation (diagonal,
/// dense, CSR or compact BFGS). Unknown operator types are probed column by
/// column through apply().
Eigen::MatrixXd dense_matrix(const SymmetricOperator& op);
Eigen::MatrixXd dense_matrix(const CsrMatrix& a);

/// Explicit B = [A_L; -A_U].
Eigen::MatrixXd dense_b(const CsrMatrix& a, std::span<const Index> lower_rows,
                        std::span<const Index> upper_rows);

/// [ H + diag(q)  -B^T ]
/// [ B             D   ]
Eigen::MatrixXd assemble_reduced(const SymmetricOperator& h, const CsrMatrix& a,
                                 std::span<const Index> lower_rows,
                                 std::span<const Index> upper_rows,
                                 std::span<const double> q_extra, std::span<const double> d_lower,
                                 std::span<const double> d_upper);

/// [ H + diag(q) + 2 B^T D^-1 B   B^T ]
/// [ B                            D   ]
Eigen::MatrixXd assemble_doubly_augmented(const SymmetricOperator& h, const CsrMatrix& a,
                                          std::span<const Index> lower_rows,
                                          std::span<const Index> upper_rows,
                                          std::span<const double> q_extra,
                                          std::span<const double> d_lower,
                                          std::span<const double> d_upper);

/// Unreduced Newton system of the perturbed KKT conditions at an iterate.
/// Unknown order: dx, dlam (lin_lower, lin_upper, var_lower, var_upper),
/// ds (same family order).
struct NewtonSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};
NewtonSystem assemble_newton(const QpProblem& problem, const IterateState& it);

/// Newton direction from a partial-pivoting LU solve of the unreduced system.
/// Requires n + bound rows <= 500; throws OracleError when the matrix is singular.
StepDirection dense_newton_step(const QpProblem& problem, const IterateState& it);

/// Exact solution of a strictly convex QP with multipliers indexed like the
/// interior point iterate (by BoundLayout family lists).
struct QpReference {
  Vector x;
  double objective = 0.0;
  PerFamily<Vector> mult;
  /// Number of active constraints.
  Index active = 0;
  /// max of stationarity, primal infeasibility, dual infeasibility and
  /// complementarity at the returned point.
  double kkt_error = 0.0;
  int iterations = 0;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dual active-set method (Goldfarb-Idnani) with direct dense solves and a
/// final equality-constrained refinement on the optimal active set. Throws
/// OracleError when H is not positive definite, the QP is infeasible, or the
/// KKT error exceeds tolerance * max(1, ||p||_inf, max |finite bound|).
QpReference active_set_oracle(const QpProblem& problem, double tolerance = 1e-10);

/// Brute-force enumeration of active sets, for tiny problems. Throws
/// OracleError above max_candidates candidate sets.
QpReference enumerate_oracle(const QpProblem& problem, double tolerance = 1e-10,
                             std::size_t max_candidates = 1u << 20);

}  // namespace ipqp::bench
