#include "ipqp/pcg.hpp"

#include <algorithm>
#include <cmath>

#include "ipqp/vec.hpp"

namespace ipqp {

namespace {

void true_residual(const SymmetricOperator& op, std::span<const double> b,
                   std::span<const double> x, std::span<double> r) {
  op.apply(x, r);
  for (Index i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
}

}  // namespace

PcgReport pcg_solve(const SymmetricOperator& op, std::span<const double> precond_diag,
                    std::span<const double> b, std::span<double> x, const PcgConfig& cfg) {
  const Index n = op.dim();
  require(b.size() == n && x.size() == n && precond_diag.size() == n,
          "pcg: dimension mismatch");
  require(cfg.rel_tolerance >= 0.0 && cfg.rel_tolerance < 1.0 && cfg.abs_tolerance >= 0.0,
          "pcg: invalid tolerances");
  require(cfg.max_iterations > 0, "pcg: max_iterations must be positive");
  for (double d : precond_diag) require(d > 0.0, "pcg: preconditioner must be positive");

  Vector inv_m(n);
  for (Index i = 0; i < n; ++i) inv_m[i] = 1.0 / precond_diag[i];

  Vector r(n), z(n), p(n), q(n);
  true_residual(op, b, x, r);

  const double b_norm = vec::norm2(b);
  const double target = std::max(cfg.rel_tolerance * b_norm, cfg.abs_tolerance);
  const auto relative = [b_norm](double r_norm) {
    return b_norm > 0.0 ? r_norm / b_norm : r_norm;
  };

  PcgReport report;
  double r_norm = vec::norm2(r);
  if (r_norm <= target) {
    report.status = PcgStatus::kConverged;
    report.final_relative_residual = relative(r_norm);
    return report;
  }

  for (Index i = 0; i < n; ++i) z[i] = inv_m[i] * r[i];
  p = z;
  double rz = vec::dot(r, z);

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    op.apply(p, q);
    const double pq = vec::dot(p, q);
    if (!(pq > 0.0) || !std::isfinite(pq)) {
      report.status = PcgStatus::kBreakdown;
      report.iterations = it;
      true_residual(op, b, x, r);
      report.final_relative_residual = relative(vec::norm2(r));
      return report;
    }
    const double alpha = rz / pq;
    vec::axpy(alpha, p, x);
    vec::axpy(-alpha, q, r);
    report.iterations = it;

    r_norm = vec::norm2(r);
    if (r_norm <= target) {
      true_residual(op, b, x, r);
      r_norm = vec::norm2(r);
      if (r_norm <= target) {
        report.status = PcgStatus::kConverged;
        report.final_relative_residual = relative(r_norm);
        return report;
      }
    }

    for (Index i = 0; i < n; ++i) z[i] = inv_m[i] * r[i];
    const double rz_next = vec::dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    vec::axpby(1.0, z, beta, p);
  }

  true_residual(op, b, x, r);
  r_norm = vec::norm2(r);
  report.final_relative_residual = relative(r_norm);
  report.status = r_norm <= target ? PcgStatus::kConverged : PcgStatus::kMaxIterations;
  return report;
}

}  // namespace ipqp
