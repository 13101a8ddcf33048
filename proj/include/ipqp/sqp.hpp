#pragma once

// SQP driver producing BFGS-Hessian QP subproblems for the interior point
// solver. Problems have the form
//
//   min f(x)  s.t.  g(x) <= 0,  a <= x <= b
//
// with Lagrangian L(x, lam) = f(x) + lam^T g(x), lam >= 0.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "ipqp/ipm.hpp"
#include "ipqp/linops.hpp"

namespace ipqp {

struct NlpProblem {
  Index n = 0;
  Index m = 0;
  Vector var_lower;
  Vector var_upper;
  /// Returns f(x) and writes the gradient.
  std::function<double(std::span<const double> x, std::span<double> grad)> objective;
  /// Writes g(x) (m entries) and the Jacobian (m x n, row-major). May be empty
  /// when m == 0.
  std::function<void(std::span<const double> x, std::span<double> g, std::span<double> jac)>
      constraints;
};

/// Callback values at one point.
struct NlpEvaluation {
  double f = 0.0;
  Vector grad;
  Vector g;
  Vector jac;  // row-major m x n
};

NlpEvaluation evaluate(const NlpProblem& problem, std::span<const double> x);

struct SqpState {
  Vector x;
  Vector lambda;
  std::shared_ptr<const BfgsOperator> bfgs;
  int iteration = 0;
};

/// QP in the step d: H = bfgs, p = grad f, A = jac g, -inf <= A d <= -g,
/// a - x <= d <= b - x.
QpProblem build_subproblem(const SqpState& state, const NlpProblem& problem);
QpProblem build_subproblem(const SqpState& state, const NlpProblem& problem,
                           const NlpEvaluation& at_x);

struct BfgsUpdate {
  std::shared_ptr<const BfgsOperator> op;
  bool skipped = false;
  bool damped = false;
  double theta = 1.0;
};

/// Powell-damped BFGS update appended as two columns:
///   H+ = H - (Hs)(Hs)^T / (s^T H s) + yd yd^T / (yd^T s),
/// where yd = theta y + (1 - theta) H s keeps yd^T s >= damping * s^T H s.
/// Skipped (op unchanged) when s^T H s <= 0.
BfgsUpdate bfgs_update(const std::shared_ptr<const BfgsOperator>& bfgs,
                       std::span<const double> step, std::span<const double> grad_diff,
                       double damping = 0.2);

struct SqpConfig {
  int max_iterations = 100;
  /// Converged once ||d||_inf and the NLP KKT residual both fall below these.
  double step_tolerance = 1e-8;
  double kkt_tolerance = 1e-8;
  /// H0 diagonal. Defaults to max(1, |f(x0)|) on every entry.
  std::optional<Vector> initial_hessian_diag;
  double damping = 0.2;
  double armijo = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-10;
  /// l1 penalty is kept >= ||lam||_inf + penalty_margin.
  double penalty_margin = 1e-2;
  IpmConfig ipm;
};

enum class SqpStatus { kConverged, kIterationLimit, kSubproblemFailure, kLineSearchFailure };

const char* to_string(SqpStatus status);

/// One SQP iteration as seen by a trace consumer.
struct SqpIterationTrace {
  int iteration = 0;
  double objective = 0.0;
  double merit = 0.0;
  double penalty = 0.0;
  double step_inf = 0.0;
  double kkt_residual = 0.0;
  double alpha = 0.0;
  Index pair_count = 0;
  bool damped = false;
  bool update_skipped = false;
  SolveStatus qp_status = SolveStatus::kError;
  int qp_ipm_iterations = 0;
  int qp_cg_iterations = 0;
  double qp_solve_ms = 0.0;
};

struct SqpStats {
  int iterations = 0;
  double total_qp_ms = 0.0;
  std::vector<SqpIterationTrace> trace;
};

struct SqpResult {
  SqpStatus status = SqpStatus::kIterationLimit;
  Vector x;
  Vector lambda;
  double objective = 0.0;
  SqpStats stats;
  std::string message;
};

/// Called after every subproblem solve, before the line search.
using SubproblemObserver =
    std::function<void(int iteration, const QpProblem& qp, const IpmResult& solution)>;

/// max of the projected-gradient stationarity, constraint violation and
/// complementarity |lam_i g_i| at (x, lam).
double nlp_kkt_residual(const NlpProblem& problem, const NlpEvaluation& eval,
                        std::span<const double> x, std::span<const double> lambda);

SqpResult sqp_solve(const NlpProblem& problem, std::span<const double> x0,
                    const SqpConfig& cfg = {}, const SubproblemObserver& observer = {});

}  // namespace ipqp
