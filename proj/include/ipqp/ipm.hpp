#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "ipqp/iterate.hpp"
#include "ipqp/pcg.hpp"
#include "ipqp/problem.hpp"

namespace ipqp {

struct IpmConfig {
  double mu0_scale = 0.1;
  double mu_tol = 1e-8;
  double mu_divisor = 10.0;
  /// Fraction-to-boundary factor.
  double tau = 0.995;
  int max_iterations = 100;

  /// Fixed CG relative tolerance. When unset the tolerance follows
  /// min(1e-2, 0.1 mu), floored at 1e-10.
  std::optional<double> pcg_rel_tolerance;
  double pcg_abs_tolerance = 1e-12;
  /// Defaults to 10 * (n + m_l + m_u).
  std::optional<int> pcg_max_iterations;
  /// Start CG from the previous direction instead of zero.
  bool pcg_warm_start = false;
  /// Extra reduced solves driven by the unreduced Newton residual, taken
  /// while its relative 2-norm exceeds max(refinement_tolerance, 10 * the
  /// relative residual CG reached). Correction solves ignore pcg_abs_tolerance.
  int max_refinement_steps = 2;
  double refinement_tolerance = 0.0;

  void validate() const;
};

enum class SolveStatus { kConverged, kIterationLimit, kError };

const char* to_string(SolveStatus status);

struct IterationTrace {
  int iteration = 0;
  double mu = 0.0;  // barrier parameter used for this iteration's step
  double residual_inf = 0.0;
  double dual_inf = 0.0;
  double primal_inf = 0.0;
  double comp_inf = 0.0;
  int cg_iterations = 0;
  double cg_relative_residual = 0.0;
  double cg_rel_tolerance = 0.0;
  int refinement_steps = 0;
  /// ||K d + r||_2 / ||r||_2 for the unreduced Newton system.
  double newton_relative_residual = 0.0;
  double alpha_x = 0.0;
  double alpha_lambda = 0.0;
  double min_interior = 0.0;
  bool mu_decreased = false;
};

struct PhaseTimings {
  double setup_ms = 0.0;
  double rhs_ms = 0.0;
  double pcg_ms = 0.0;
  double step_ms = 0.0;
  double residual_ms = 0.0;
  double total_ms = 0.0;
};

struct SolveStats {
  int ipm_iterations = 0;
  int cg_iterations = 0;
  PhaseTimings timings;
  std::vector<IterationTrace> trace;
};

struct IpmResult {
  SolveStatus status = SolveStatus::kError;
  IterateState iterate;
  ResidualSet residuals;
  double objective = 0.0;
  SolveStats stats;
  std::string message;
};

/// Everything an instrumented run can observe about one Newton step, before
/// the iterate is updated.
struct NewtonSnapshot {
  int iteration;
  const IterateState& iterate;
  const ResidualSet& residuals;
  const StepDirection& direction;
  const PcgReport& pcg;
};

struct IpmHooks {
  std::function<void(const NewtonSnapshot&)> on_step;
  std::function<void(const IterationTrace&)> on_iteration;
};

ResidualSet compute_residuals(const QpProblem& problem, const BoundLayout& layout,
                              const IterateState& it);

IterateState initial_point(const QpProblem& problem, const BoundLayout& layout,
                           const IpmConfig& cfg);

/// Expands the reduced solution (dx, dlam_A) into the full Newton direction.
/// dlam_A stacks the lower then upper linear-constraint multipliers.
StepDirection recover_step(const QpProblem& problem, const BoundLayout& layout,
                           std::span<const double> dx, std::span<const double> dlam_a,
                           const ResidualSet& residuals, const IterateState& it);

/// Residual of the unreduced Newton system, r + K d, in residual-family
/// layout. Zero when `dir` is the exact Newton direction for `residuals`.
ResidualSet newton_residual(const QpProblem& problem, const BoundLayout& layout,
                            const IterateState& it, const ResidualSet& residuals,
                            const StepDirection& dir);

/// Fraction-to-boundary step lengths (alpha_x for x and every slack family,
/// alpha_lambda for every multiplier family).
std::pair<double, double> step_lengths(const IterateState& it, const StepDirection& dir,
                                       double tau);

/// CG relative tolerance used for a given barrier parameter.
double pcg_tolerance_for(double mu, const IpmConfig& cfg);

IpmResult ipm_solve(const QpProblem& problem, const IpmConfig& cfg = {},
                    const IpmHooks& hooks = {});

}  // namespace ipqp
