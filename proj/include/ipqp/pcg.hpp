#pragma once

#include <span>

#include "ipqp/linops.hpp"

namespace ipqp {

struct PcgConfig {
  double rel_tolerance = 1e-10;
  double abs_tolerance = 1e-12;
  int max_iterations = 1000;
};

enum class PcgStatus {
  kConverged,
  kMaxIterations,
  /// p^T A p <= 0: the operator is not positive definite on the Krylov space.
  kBreakdown,
};

struct PcgReport {
  PcgStatus status = PcgStatus::kMaxIterations;
  int iterations = 0;
  /// ||b - A x|| / ||b|| of the returned x (true residual, not the recurrence).
  double final_relative_residual = 0.0;
  bool converged() const noexcept { return status == PcgStatus::kConverged; }
};

/// Jacobi-preconditioned CG on op x = b, starting from the contents of x.
///
/// Stops once ||b - op x||_2 <= max(rel_tolerance ||b||_2, abs_tolerance). The
/// residual is recomputed from scratch whenever the recurrence claims
/// convergence, and iteration resumes from the true residual if it disagrees.
PcgReport pcg_solve(const SymmetricOperator& op, std::span<const double> precond_diag,
                    std::span<const double> b, std::span<double> x, const PcgConfig& cfg);

}  // namespace ipqp
