#include "ipqp/ipm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ipqp/kkt.hpp"
#include "ipqp/vec.hpp"

namespace ipqp {

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// z_i = -lam_lA (rows in L) + lam_uA (rows in U), so that A^T z is the
// linear-constraint part of the dual residual.
Vector signed_row_multipliers(const BoundLayout& layout, const IterateState& it, Index m) {
  Vector z(m, 0.0);
  for (Index k = 0; k < layout.lin_lower.size(); ++k) z[layout.lin_lower[k]] -= it.mult.lin_lower[k];
  for (Index k = 0; k < layout.lin_upper.size(); ++k) z[layout.lin_upper[k]] += it.mult.lin_upper[k];
  return z;
}

double ratio_bound(std::span<const double> v, std::span<const double> dv) {
  double bound = kInf;
  for (Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) bound = std::min(bound, -v[i] / dv[i]);
  }
  return bound;
}

}  // namespace

void IpmConfig::validate() const {
  require(mu0_scale > 0.0, "ipm config: mu0_scale must be positive");
  require(mu_tol > 0.0, "ipm config: mu_tol must be positive");
  require(mu_divisor > 1.0, "ipm config: mu_divisor must exceed 1");
  require(tau > 0.0 && tau < 1.0, "ipm config: tau must lie in (0, 1)");
  require(max_iterations > 0, "ipm config: max_iterations must be positive");
  if (pcg_rel_tolerance) {
    require(*pcg_rel_tolerance > 0.0 && *pcg_rel_tolerance < 1.0,
            "ipm config: pcg relative tolerance must lie in (0, 1)");
  }
  require(pcg_abs_tolerance >= 0.0, "ipm config: pcg absolute tolerance must be nonnegative");
  if (pcg_max_iterations) require(*pcg_max_iterations > 0, "ipm config: pcg max iterations");
  require(max_refinement_steps >= 0, "ipm config: max_refinement_steps must be nonnegative");
  require(refinement_tolerance >= 0.0, "ipm config: refinement_tolerance must be nonnegative");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kIterationLimit:
      return "iteration-limit";
    case SolveStatus::kError:
      return "error";
  }
  return "error";
}

ResidualSet compute_residuals(const QpProblem& problem, const BoundLayout& layout,
                              const IterateState& it) {
  const Index m = problem.m();
  const auto& a = problem.constraints();
  ResidualSet res;

  res.dual = problem.hessian().apply(it.x);
  vec::axpy(1.0, problem.linear_term(), res.dual);
  if (m > 0) {
    const Vector z = signed_row_multipliers(layout, it, m);
    const Vector atz = a.apply_transpose(z);
    vec::axpy(1.0, atz, res.dual);
  }
  for (Index k = 0; k < layout.var_lower.size(); ++k) res.dual[layout.var_lower[k]] -= it.mult.var_lower[k];
  for (Index k = 0; k < layout.var_upper.size(); ++k) res.dual[layout.var_upper[k]] += it.mult.var_upper[k];

  const Vector ax = m > 0 ? a.apply(it.x) : Vector{};
  res.primal = family_vectors(layout, 0.0);
  for (Index k = 0; k < layout.lin_lower.size(); ++k) {
    const Index i = layout.lin_lower[k];
    res.primal.lin_lower[k] = ax[i] - it.slack.lin_lower[k] - problem.lin_lower()[i];
  }
  for (Index k = 0; k < layout.lin_upper.size(); ++k) {
    const Index i = layout.lin_upper[k];
    res.primal.lin_upper[k] = problem.lin_upper()[i] - ax[i] - it.slack.lin_upper[k];
  }
  for (Index k = 0; k < layout.var_lower.size(); ++k) {
    const Index j = layout.var_lower[k];
    res.primal.var_lower[k] = it.x[j] - it.slack.var_lower[k] - problem.var_lower()[j];
  }
  for (Index k = 0; k < layout.var_upper.size(); ++k) {
    const Index j = layout.var_upper[k];
    res.primal.var_upper[k] = problem.var_upper()[j] - it.x[j] - it.slack.var_upper[k];
  }

  res.comp = family_vectors(layout, 0.0);
  auto comp = res.comp.all();
  const auto slack = it.slack.all();
  const auto mult = it.mult.all();
  for (int f = 0; f < 4; ++f) {
    for (Index k = 0; k < comp[f]->size(); ++k) {
      (*comp[f])[k] = (*mult[f])[k] * (*slack[f])[k] - it.mu;
    }
  }
  return res;
}

IterateState initial_point(const QpProblem& problem, const BoundLayout& layout,
                           const IpmConfig& cfg) {
  const Index n = problem.n();
  IterateState it;
  it.x.assign(n, 0.0);
  for (Index j = 0; j < n; ++j) {
    const double a = problem.var_lower()[j];
    const double b = problem.var_upper()[j];
    const bool has_a = std::isfinite(a);
    const bool has_b = std::isfinite(b);
    if (has_a && has_b) {
      const double delta = std::min(1.0, (b - a) / 4.0);
      it.x[j] = std::clamp(0.0, a + delta, b - delta);
    } else if (has_a) {
      it.x[j] = std::max(0.0, a + 1.0);
    } else if (has_b) {
      it.x[j] = std::min(0.0, b - 1.0);
    }
  }

  const Vector ax = problem.m() > 0 ? problem.constraints().apply(it.x) : Vector{};
  it.slack = family_vectors(layout, 1.0);
  it.mult = family_vectors(layout, 1.0);
  for (Index k = 0; k < layout.lin_lower.size(); ++k) {
    const Index i = layout.lin_lower[k];
    it.slack.lin_lower[k] = std::max(ax[i] - problem.lin_lower()[i], 1.0);
  }
  for (Index k = 0; k < layout.lin_upper.size(); ++k) {
    const Index i = layout.lin_upper[k];
    it.slack.lin_upper[k] = std::max(problem.lin_upper()[i] - ax[i], 1.0);
  }
  for (Index k = 0; k < layout.var_lower.size(); ++k) {
    const Index j = layout.var_lower[k];
    it.slack.var_lower[k] = std::max(it.x[j] - problem.var_lower()[j], 1.0);
  }
  for (Index k = 0; k < layout.var_upper.size(); ++k) {
    const Index j = layout.var_upper[k];
    it.slack.var_upper[k] = std::max(problem.var_upper()[j] - it.x[j], 1.0);
  }

  double gap = 0.0;
  const auto slack = it.slack.all();
  const auto mult = it.mult.all();
  for (int f = 0; f < 4; ++f) gap += vec::dot(*mult[f], *slack[f]);
  const Index total = layout.total();
  it.mu = total > 0 ? cfg.mu0_scale * gap / static_cast<double>(total) : cfg.mu0_scale;
  return it;
}

StepDirection recover_step(const QpProblem& problem, const BoundLayout& layout,
                           std::span<const double> dx, std::span<const double> dlam_a,
                           const ResidualSet& res, const IterateState& it) {
  const Index ml = layout.lin_lower.size();
  const Index mu_count = layout.lin_upper.size();
  require(dx.size() == problem.n() && dlam_a.size() == ml + mu_count,
          "recover_step: dimension mismatch");
  StepDirection dir;
  dir.dx.assign(dx.begin(), dx.end());
  dir.dslack = family_vectors(layout, 0.0);
  dir.dmult = family_vectors(layout, 0.0);

  dir.dmult.lin_lower.assign(dlam_a.begin(), dlam_a.begin() + static_cast<std::ptrdiff_t>(ml));
  dir.dmult.lin_upper.assign(dlam_a.begin() + static_cast<std::ptrdiff_t>(ml), dlam_a.end());

  if (problem.m() > 0) {
    const Vector adx = problem.constraints().apply(dx);
    for (Index k = 0; k < ml; ++k) {
      dir.dslack.lin_lower[k] = adx[layout.lin_lower[k]] + res.primal.lin_lower[k];
    }
    for (Index k = 0; k < mu_count; ++k) {
      dir.dslack.lin_upper[k] = -adx[layout.lin_upper[k]] + res.primal.lin_upper[k];
    }
  }

  for (Index k = 0; k < layout.var_lower.size(); ++k) {
    const double s = it.slack.var_lower[k];
    const double lam = it.mult.var_lower[k];
    if (!(s > 0.0)) throw InteriorError("recover_step: zero slack");
    const double ds = dx[layout.var_lower[k]] + res.primal.var_lower[k];
    dir.dslack.var_lower[k] = ds;
    dir.dmult.var_lower[k] = -(lam * ds + res.comp.var_lower[k]) / s;
  }
  for (Index k = 0; k < layout.var_upper.size(); ++k) {
    const double s = it.slack.var_upper[k];
    const double lam = it.mult.var_upper[k];
    if (!(s > 0.0)) throw InteriorError("recover_step: zero slack");
    const double ds = res.primal.var_upper[k] - dx[layout.var_upper[k]];
    dir.dslack.var_upper[k] = ds;
    dir.dmult.var_upper[k] = -(lam * ds + res.comp.var_upper[k]) / s;
  }
  return dir;
}

ResidualSet newton_residual(const QpProblem& problem, const BoundLayout& layout,
                            const IterateState& it, const ResidualSet& residuals,
                            const StepDirection& dir) {
  const Index m = problem.m();
  ResidualSet out = residuals;
  vec::axpy(1.0, problem.hessian().apply(dir.dx), out.dual);
  Vector adx;
  if (m > 0) {
    Vector z(m, 0.0);
    for (Index k = 0; k < layout.lin_lower.size(); ++k) z[layout.lin_lower[k]] -= dir.dmult.lin_lower[k];
    for (Index k = 0; k < layout.lin_upper.size(); ++k) z[layout.lin_upper[k]] += dir.dmult.lin_upper[k];
    vec::axpy(1.0, problem.constraints().apply_transpose(z), out.dual);
    adx = problem.constraints().apply(dir.dx);
  }
  for (Index k = 0; k < layout.var_lower.size(); ++k) out.dual[layout.var_lower[k]] -= dir.dmult.var_lower[k];
  for (Index k = 0; k < layout.var_upper.size(); ++k) out.dual[layout.var_upper[k]] += dir.dmult.var_upper[k];

  for (Index k = 0; k < layout.lin_lower.size(); ++k) {
    out.primal.lin_lower[k] += adx[layout.lin_lower[k]] - dir.dslack.lin_lower[k];
  }
  for (Index k = 0; k < layout.lin_upper.size(); ++k) {
    out.primal.lin_upper[k] += -adx[layout.lin_upper[k]] - dir.dslack.lin_upper[k];
  }
  for (Index k = 0; k < layout.var_lower.size(); ++k) {
    out.primal.var_lower[k] += dir.dx[layout.var_lower[k]] - dir.dslack.var_lower[k];
  }
  for (Index k = 0; k < layout.var_upper.size(); ++k) {
    out.primal.var_upper[k] += -dir.dx[layout.var_upper[k]] - dir.dslack.var_upper[k];
  }

  auto comp = out.comp.all();
  const auto s = it.slack.all();
  const auto lam = it.mult.all();
  const auto ds = dir.dslack.all();
  const auto dlam = dir.dmult.all();
  for (int f = 0; f < 4; ++f) {
    for (Index k = 0; k < comp[f]->size(); ++k) {
      (*comp[f])[k] += (*s[f])[k] * (*dlam[f])[k] + (*lam[f])[k] * (*ds[f])[k];
    }
  }
  return out;
}

std::pair<double, double> step_lengths(const IterateState& it, const StepDirection& dir,
                                       double tau) {
  double max_x = kInf;
  double max_lambda = kInf;
  const auto s = it.slack.all();
  const auto ds = dir.dslack.all();
  const auto lam = it.mult.all();
  const auto dlam = dir.dmult.all();
  for (int f = 0; f < 4; ++f) {
    max_x = std::min(max_x, ratio_bound(*s[f], *ds[f]));
    max_lambda = std::min(max_lambda, ratio_bound(*lam[f], *dlam[f]));
  }
  return {std::min(1.0, tau * max_x), std::min(1.0, tau * max_lambda)};
}

namespace {

// Reduce, solve and expand one Newton system. False on CG breakdown.
bool reduced_solve(const QpProblem& problem, const BoundLayout& layout, const IterateState& it,
                   const ResidualSet& res, const KktOperator& kkt, const Vector& precond,
                   const PcgConfig& pcg_cfg, Vector& solution, PhaseTimings& timings,
                   PcgReport& pcg, StepDirection& dir) {
  const Stopwatch rhs_clock;
  const Vector rhs = kkt.augmented_rhs(reduce_residuals(res, it, layout));
  timings.rhs_ms += rhs_clock.elapsed_ms();

  const Stopwatch pcg_clock;
  pcg = pcg_solve(kkt, precond, rhs, solution, pcg_cfg);
  timings.pcg_ms += pcg_clock.elapsed_ms();
  if (pcg.status == PcgStatus::kBreakdown) return false;

  const Stopwatch step_clock;
  const std::span<const double> sol(solution);
  const Index n = problem.n();
  dir = recover_step(problem, layout, sol.first(n), sol.subspan(n), res, it);
  timings.step_ms += step_clock.elapsed_ms();
  return true;
}

}  // namespace

double pcg_tolerance_for(double mu, const IpmConfig& cfg) {
  if (cfg.pcg_rel_tolerance) return *cfg.pcg_rel_tolerance;
  return std::max(std::min(1e-2, 0.1 * mu), 1e-10);
}

IpmResult ipm_solve(const QpProblem& problem, const IpmConfig& cfg, const IpmHooks& hooks) {
  cfg.validate();
  const Stopwatch total_clock;
  IpmResult result;
  SolveStats& stats = result.stats;
  PhaseTimings& timings = stats.timings;

  const Stopwatch setup_clock;
  const Index n = problem.n();
  const BoundLayout layout = BoundLayout::of(problem);
  IterateState it = initial_point(problem, layout, cfg);
  KktOperator kkt(problem.hessian_ptr(), problem.constraints_ptr(), layout.lin_lower,
                  layout.lin_upper);
  {
    const auto d = iterate_diagonals(it, layout, n);
    kkt.update_diagonals(d.q_extra, d.d_lower, d.d_upper);
  }
  ResidualSet res = compute_residuals(problem, layout, it);
  PcgConfig pcg_cfg;
  pcg_cfg.abs_tolerance = cfg.pcg_abs_tolerance;
  pcg_cfg.max_iterations =
      cfg.pcg_max_iterations.value_or(static_cast<int>(10 * kkt.dim()));
  Vector solution(kkt.dim(), 0.0);
  timings.setup_ms = setup_clock.elapsed_ms();

  result.status = SolveStatus::kIterationLimit;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    stats.ipm_iterations = iter;
    IterationTrace trace;
    trace.iteration = iter;
    trace.mu = it.mu;

    pcg_cfg.rel_tolerance = pcg_tolerance_for(it.mu, cfg);
    const Vector precond = kkt.jacobi_diagonal();
    if (!cfg.pcg_warm_start) std::fill(solution.begin(), solution.end(), 0.0);
    PcgReport pcg;
    StepDirection dir;
    const bool ok = reduced_solve(problem, layout, it, res, kkt, precond, pcg_cfg, solution,
                                  timings, pcg, dir);
    stats.cg_iterations += pcg.iterations;
    trace.cg_iterations = pcg.iterations;
    trace.cg_relative_residual = pcg.final_relative_residual;
    trace.cg_rel_tolerance = pcg_cfg.rel_tolerance;
    if (!ok) {
      result.status = SolveStatus::kError;
      result.message = "PCG breakdown at IPM iteration " + std::to_string(iter) +
                       ": KKT operator lost positive definiteness";
      break;
    }

    const Stopwatch refine_clock;
    const double base_norm = res.norm2();
    double rel = base_norm > 0.0
                     ? newton_residual(problem, layout, it, res, dir).norm2() / base_norm
                     : 0.0;
    const double refine_above =
        std::max(cfg.refinement_tolerance, 10.0 * pcg.final_relative_residual);
    PcgConfig correction_cfg = pcg_cfg;
    correction_cfg.abs_tolerance = 0.0;
    Vector correction(kkt.dim(), 0.0);
    while (rel > refine_above && trace.refinement_steps < cfg.max_refinement_steps) {
      const ResidualSet r = newton_residual(problem, layout, it, res, dir);
      std::fill(correction.begin(), correction.end(), 0.0);
      PcgReport extra;
      StepDirection delta;
      if (!reduced_solve(problem, layout, it, r, kkt, precond, correction_cfg, correction,
                         timings, extra, delta)) {
        break;
      }
      stats.cg_iterations += extra.iterations;
      trace.cg_iterations += extra.iterations;
      ++trace.refinement_steps;
      StepDirection trial = dir;
      vec::axpy(1.0, delta.dx, trial.dx);
      auto ts = trial.dslack.all();
      auto tl = trial.dmult.all();
      const auto es = delta.dslack.all();
      const auto el = delta.dmult.all();
      for (int f = 0; f < 4; ++f) {
        vec::axpy(1.0, *es[f], *ts[f]);
        vec::axpy(1.0, *el[f], *tl[f]);
      }
      const double trial_rel = newton_residual(problem, layout, it, res, trial).norm2() / base_norm;
      if (!(trial_rel < rel)) break;
      dir = std::move(trial);
      rel = trial_rel;
    }
    trace.newton_relative_residual = rel;
    timings.step_ms += refine_clock.elapsed_ms();

    const Stopwatch step_clock;
    if (hooks.on_step) hooks.on_step(NewtonSnapshot{iter, it, res, dir, pcg});

    const auto [alpha_x, alpha_lambda] = step_lengths(it, dir, cfg.tau);
    vec::axpy(alpha_x, dir.dx, it.x);
    {
      auto s = it.slack.all();
      auto ds = dir.dslack.all();
      auto lam = it.mult.all();
      auto dlam = dir.dmult.all();
      for (int f = 0; f < 4; ++f) {
        vec::axpy(alpha_x, *ds[f], *s[f]);
        vec::axpy(alpha_lambda, *dlam[f], *lam[f]);
      }
    }
    trace.alpha_x = alpha_x;
    trace.alpha_lambda = alpha_lambda;
    trace.min_interior = it.min_interior();
    if (!(trace.min_interior > 0.0)) {
      throw InteriorError("ipm: iterate left the interior at iteration " + std::to_string(iter));
    }
    const auto d = iterate_diagonals(it, layout, n);
    kkt.update_diagonals(d.q_extra, d.d_lower, d.d_upper);
    timings.step_ms += step_clock.elapsed_ms();

    const Stopwatch residual_clock;
    res = compute_residuals(problem, layout, it);
    timings.residual_ms += residual_clock.elapsed_ms();
    trace.residual_inf = res.norm_inf();
    trace.dual_inf = res.dual_inf();
    trace.primal_inf = res.primal_inf();
    trace.comp_inf = res.comp_inf();

    if (!res.finite() || !vec::all_finite(it.x)) {
      stats.trace.push_back(trace);
      if (hooks.on_iteration) hooks.on_iteration(trace);
      result.status = SolveStatus::kError;
      result.message = "non-finite residual at IPM iteration " + std::to_string(iter);
      break;
    }

    bool done = false;
    if (trace.residual_inf < it.mu) {
      if (it.mu <= cfg.mu_tol) {
        done = true;
      } else {
        it.mu /= cfg.mu_divisor;
        trace.mu_decreased = true;
        res = compute_residuals(problem, layout, it);
      }
    }
    stats.trace.push_back(trace);
    if (hooks.on_iteration) hooks.on_iteration(trace);
    if (done) {
      result.status = SolveStatus::kConverged;
      break;
    }
  }

  result.objective = problem.objective(it.x);
  result.iterate = std::move(it);
  result.residuals = std::move(res);
  if (result.status == SolveStatus::kIterationLimit) {
    result.message = "reached the IPM iteration limit";
  }
  timings.total_ms = total_clock.elapsed_ms();
  return result;
}

}  // namespace ipqp
