#include "ipqp/sqp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ipqp/vec.hpp"

namespace ipqp {

namespace {

double violation_l1(std::span<const double> g) {
  double sum = 0.0;
  for (double v : g) sum += std::max(0.0, v);
  return sum;
}

// grad f + J^T lam
Vector lagrangian_gradient(const NlpProblem& problem, const NlpEvaluation& eval,
                           std::span<const double> lambda) {
  Vector out = eval.grad;
  for (Index i = 0; i < problem.m; ++i) {
    const double li = lambda[i];
    if (li == 0.0) continue;
    for (Index j = 0; j < problem.n; ++j) out[j] += li * eval.jac[i * problem.n + j];
  }
  return out;
}

Vector project(const NlpProblem& problem, std::span<const double> x) {
  Vector out(x.begin(), x.end());
  for (Index j = 0; j < problem.n; ++j) {
    out[j] = std::clamp(out[j], problem.var_lower[j], problem.var_upper[j]);
  }
  return out;
}

}  // namespace

const char* to_string(SqpStatus status) {
  switch (status) {
    case SqpStatus::kConverged:
      return "converged";
    case SqpStatus::kIterationLimit:
      return "iteration-limit";
    case SqpStatus::kSubproblemFailure:
      return "subproblem-failure";
    case SqpStatus::kLineSearchFailure:
      return "line-search-failure";
  }
  return "error";
}

NlpEvaluation evaluate(const NlpProblem& problem, std::span<const double> x) {
  require(x.size() == problem.n, "nlp evaluate: dimension mismatch");
  NlpEvaluation eval;
  eval.grad.assign(problem.n, 0.0);
  eval.f = problem.objective(x, eval.grad);
  eval.g.assign(problem.m, 0.0);
  eval.jac.assign(problem.m * problem.n, 0.0);
  if (problem.m > 0) problem.constraints(x, eval.g, eval.jac);
  if (!std::isfinite(eval.f) || !vec::all_finite(eval.grad) || !vec::all_finite(eval.g) ||
      !vec::all_finite(eval.jac)) {
    throw std::runtime_error("nlp evaluate: callback returned a non-finite value");
  }
  return eval;
}

QpProblem build_subproblem(const SqpState& state, const NlpProblem& problem) {
  return build_subproblem(state, problem, evaluate(problem, state.x));
}

QpProblem build_subproblem(const SqpState& state, const NlpProblem& problem,
                           const NlpEvaluation& at_x) {
  const Index n = problem.n;
  const Index m = problem.m;
  require(state.bfgs && state.bfgs->dim() == n, "build_subproblem: Hessian size mismatch");
  auto a = std::make_shared<const CsrMatrix>(CsrMatrix::from_dense(m, n, at_x.jac));
  Vector lin_lower(m, -kInf);
  Vector lin_upper(m);
  for (Index i = 0; i < m; ++i) lin_upper[i] = -at_x.g[i];
  Vector var_lower(n), var_upper(n);
  for (Index j = 0; j < n; ++j) {
    var_lower[j] = problem.var_lower[j] - state.x[j];
    var_upper[j] = problem.var_upper[j] - state.x[j];
  }
  return QpProblem(state.bfgs, at_x.grad, std::move(a), std::move(lin_lower),
                   std::move(lin_upper), std::move(var_lower), std::move(var_upper));
}

BfgsUpdate bfgs_update(const std::shared_ptr<const BfgsOperator>& bfgs,
                       std::span<const double> step, std::span<const double> grad_diff,
                       double damping) {
  require(bfgs != nullptr, "bfgs_update: missing operator");
  require(step.size() == bfgs->dim() && grad_diff.size() == bfgs->dim(),
          "bfgs_update: dimension mismatch");
  require(vec::norm_inf(step) > 0.0, "bfgs_update: zero step");

  BfgsUpdate out;
  out.op = bfgs;
  const Vector hs = bfgs->apply(step);
  const double shs = vec::dot(step, hs);
  if (!(shs > 0.0) || !std::isfinite(shs)) {
    out.skipped = true;
    return out;
  }
  const double sy = vec::dot(step, grad_diff);
  if (sy < damping * shs) {
    out.theta = (1.0 - damping) * shs / (shs - sy);
    out.damped = true;
  }
  Vector yd(step.size());
  for (Index i = 0; i < yd.size(); ++i) {
    yd[i] = out.theta * grad_diff[i] + (1.0 - out.theta) * hs[i];
  }
  const double yds = vec::dot(yd, step);
  if (!(yds > 0.0) || !std::isfinite(yds)) {
    out.skipped = true;
    return out;
  }
  out.op = bfgs->with_pair(hs, -1.0 / shs, yd, 1.0 / yds);
  return out;
}

double nlp_kkt_residual(const NlpProblem& problem, const NlpEvaluation& eval,
                        std::span<const double> x, std::span<const double> lambda) {
  const Vector grad_l = lagrangian_gradient(problem, eval, lambda);
  double r = 0.0;
  for (Index j = 0; j < problem.n; ++j) {
    const double projected =
        std::clamp(x[j] - grad_l[j], problem.var_lower[j], problem.var_upper[j]);
    r = std::max(r, std::abs(x[j] - projected));
  }
  for (Index i = 0; i < problem.m; ++i) {
    r = std::max(r, std::max(0.0, eval.g[i]));
    r = std::max(r, std::abs(lambda[i] * eval.g[i]));
  }
  return r;
}

SqpResult sqp_solve(const NlpProblem& problem, std::span<const double> x0,
                    const SqpConfig& cfg, const SubproblemObserver& observer) {
  const Index n = problem.n;
  const Index m = problem.m;
  require(x0.size() == n && problem.var_lower.size() == n && problem.var_upper.size() == n,
          "sqp: dimension mismatch");
  for (Index j = 0; j < n; ++j) {
    require(x0[j] >= problem.var_lower[j] && x0[j] <= problem.var_upper[j],
            "sqp: x0 outside the variable bounds");
  }
  require(cfg.max_iterations > 0, "sqp: max_iterations must be positive");

  SqpResult result;
  SqpState state;
  state.x.assign(x0.begin(), x0.end());
  state.lambda.assign(m, 0.0);
  NlpEvaluation eval = evaluate(problem, state.x);

  Vector h0 = cfg.initial_hessian_diag.value_or(Vector(n, std::max(1.0, std::abs(eval.f))));
  require(h0.size() == n, "sqp: initial Hessian diagonal has the wrong size");
  state.bfgs = std::make_shared<const BfgsOperator>(std::move(h0));

  double penalty = 0.0;
  result.status = SqpStatus::kIterationLimit;
  for (int k = 1; k <= cfg.max_iterations; ++k) {
    state.iteration = k;
    result.stats.iterations = k;
    SqpIterationTrace trace;
    trace.iteration = k;
    trace.pair_count = state.bfgs->pair_count();

    const QpProblem qp = build_subproblem(state, problem, eval);
    const auto t0 = std::chrono::steady_clock::now();
    const IpmResult sol = ipm_solve(qp, cfg.ipm);
    trace.qp_solve_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.stats.total_qp_ms += trace.qp_solve_ms;
    trace.qp_status = sol.status;
    trace.qp_ipm_iterations = sol.stats.ipm_iterations;
    trace.qp_cg_iterations = sol.stats.cg_iterations;
    if (observer) observer(k, qp, sol);

    if (sol.status == SolveStatus::kError) {
      result.status = SqpStatus::kSubproblemFailure;
      result.message = "QP subproblem failed at SQP iteration " + std::to_string(k) + ": " +
                       sol.message;
      result.stats.trace.push_back(trace);
      break;
    }

    const Vector& d = sol.iterate.x;
    // Every constraint row has a finite upper side only, so the upper family
    // is indexed by row.
    const Vector lambda_qp = m > 0 ? sol.iterate.mult.lin_upper : Vector{};
    trace.step_inf = vec::norm_inf(d);
    trace.kkt_residual = nlp_kkt_residual(problem, eval, state.x, lambda_qp);
    trace.objective = eval.f;

    if (trace.step_inf <= cfg.step_tolerance && trace.kkt_residual <= cfg.kkt_tolerance) {
      state.lambda = lambda_qp;
      trace.merit = eval.f + penalty * violation_l1(eval.g);
      trace.penalty = penalty;
      result.stats.trace.push_back(trace);
      result.status = SqpStatus::kConverged;
      break;
    }

    penalty = std::max(penalty, (m > 0 ? vec::norm_inf(lambda_qp) : 0.0) + cfg.penalty_margin);
    const double merit0 = eval.f + penalty * violation_l1(eval.g);
    const double slope = vec::dot(eval.grad, d) - penalty * violation_l1(eval.g);

    double alpha = 1.0;
    bool accepted = false;
    Vector x_trial;
    NlpEvaluation eval_trial;
    double merit_trial = merit0;
    while (alpha >= cfg.min_step) {
      Vector candidate(n);
      for (Index j = 0; j < n; ++j) candidate[j] = state.x[j] + alpha * d[j];
      x_trial = project(problem, candidate);
      eval_trial = evaluate(problem, x_trial);
      merit_trial = eval_trial.f + penalty * violation_l1(eval_trial.g);
      if (merit_trial <= merit0 + cfg.armijo * alpha * std::min(slope, 0.0) &&
          merit_trial <= merit0) {
        accepted = true;
        break;
      }
      alpha *= cfg.backtrack;
    }
    trace.penalty = penalty;
    if (!accepted) {
      trace.merit = merit0;
      result.stats.trace.push_back(trace);
      result.status = SqpStatus::kLineSearchFailure;
      result.message = "line search failed at SQP iteration " + std::to_string(k);
      break;
    }
    trace.alpha = alpha;
    trace.merit = merit_trial;

    Vector s(n);
    for (Index j = 0; j < n; ++j) s[j] = x_trial[j] - state.x[j];
    if (vec::norm_inf(s) > 0.0) {
      const Vector g_new = lagrangian_gradient(problem, eval_trial, lambda_qp);
      const Vector g_old = lagrangian_gradient(problem, eval, lambda_qp);
      Vector y(n);
      for (Index j = 0; j < n; ++j) y[j] = g_new[j] - g_old[j];
      const BfgsUpdate upd = bfgs_update(state.bfgs, s, y, cfg.damping);
      state.bfgs = upd.op;
      trace.damped = upd.damped;
      trace.update_skipped = upd.skipped;
    } else {
      trace.update_skipped = true;
    }

    state.x = std::move(x_trial);
    state.lambda = lambda_qp;
    eval = std::move(eval_trial);
    result.stats.trace.push_back(trace);
  }

  result.x = state.x;
  result.lambda = state.lambda;
  result.objective = eval.f;
  if (result.status == SqpStatus::kIterationLimit) {
    result.message = "reached the SQP iteration limit";
  }
  return result;
}

}  // namespace ipqp
