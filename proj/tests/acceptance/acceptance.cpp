// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "ipqp/bench/oracle.hpp"
#include "ipqp/bench/suite.hpp"
#include "ipqp/ipm.hpp"
#include "ipqp/kkt.hpp"
#include "ipqp/pcg.hpp"
#include "ipqp/probio.hpp"
#include "nlp_fixtures.hpp"
#include "support.hpp"

using namespace ipqp;
using ipqp::bench::Rng;
using ipqp::fixtures::eig;
using ipqp::fixtures::rel_err;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) {
      pass = false;
      detail << "[" << why << "] ";
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double inf_norm(const Eigen::VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

// Seeded KKT operator at a random interior iterate.
struct KktInstance {
  QpProblem problem;
  BoundLayout layout;
  IterateState it;
  IterateDiagonals diag;
  std::shared_ptr<KktOperator> op;

  Eigen::MatrixXd reduced() const {
    return bench::assemble_reduced(problem.hessian(), problem.constraints(), layout.lin_lower,
                                   layout.lin_upper, diag.q_extra, diag.d_lower, diag.d_upper);
  }
  Eigen::MatrixXd augmented() const {
    return bench::assemble_doubly_augmented(problem.hessian(), problem.constraints(),
                                            layout.lin_lower, layout.lin_upper, diag.q_extra,
                                            diag.d_lower, diag.d_upper);
  }
};

KktInstance kkt_at(QpProblem problem, const IterateState& it) {
  BoundLayout layout = BoundLayout::of(problem);
  IterateDiagonals diag = iterate_diagonals(it, layout, problem.n());
  auto op = std::make_shared<KktOperator>(problem.hessian_ptr(), problem.constraints_ptr(),
                                          layout.lin_lower, layout.lin_upper);
  op->update_diagonals(diag.q_extra, diag.d_lower, diag.d_upper);
  return {std::move(problem), std::move(layout), it, std::move(diag), std::move(op)};
}

KktInstance random_kkt(std::uint64_t seed, Index n, Index m, double spread) {
  QpProblem problem = bench::generate(fixtures::small_spec(seed, n, m));
  Rng rng(seed * 31 + 7);
  const IterateState it = fixtures::random_iterate(problem, rng, spread);
  return kkt_at(std::move(problem), it);
}

Outcome oracle_equivalence() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst_x = 0.0, worst_obj = 0.0;
  int solved = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    bench::GeneratorSpec spec;
    spec.seed = 1000 + seed;
    spec.n = 1 + static_cast<Index>(seed * 7 % 12);
    spec.m = static_cast<Index>(seed * 5 % 9);
    spec.density = 0.4;
    spec.hessian = static_cast<bench::HessianKind>(seed % 3);
    spec.pairs = 1 + static_cast<Index>(seed % 3);
    spec.bounds = static_cast<bench::BoundPattern>(seed % 4);
    const QpProblem p = bench::generate(spec);
    const bench::QpReference ref = bench::active_set_oracle(p);
    const IpmResult r = ipm_solve(p);
    o.require(r.status == SolveStatus::kConverged, "seed " + std::to_string(seed) + " " + r.message);
    worst_x = std::max(worst_x, inf_norm(eig(r.iterate.x) - eig(ref.x)));
    worst_obj = std::max(worst_obj,
                         std::abs(r.objective - ref.objective) / std::max(1.0, std::abs(ref.objective)));
    ++solved;
  }
  const double secs = seconds_since(t0);
  o.require(worst_x <= 1e-5, "x error");
  o.require(worst_obj <= 1e-8, "objective error");
  o.require(secs < 30.0, "runtime");
  o.detail << solved << " QPs, max |x - x*|_inf " << sci(worst_x) << ", max objective rel err "
           << sci(worst_obj) << ", " << secs << " s";
  return o;
}

Outcome back_substitution() {
  Outcome o;
  IpmConfig cfg;
  cfg.pcg_rel_tolerance = 1e-12;
  cfg.pcg_abs_tolerance = 0.0;
  int checked = 0, over = 0;
  double worst = 0.0, worst_rhs = 0.0;
  std::string worst_at;
  Index largest = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    bench::GeneratorSpec spec;
    spec.seed = 2000 + seed;
    spec.n = 30 + static_cast<Index>(2 * seed);
    spec.m = (200 - 3 * spec.n) / 2;
    spec.density = 0.3;
    spec.hessian = static_cast<bench::HessianKind>(seed % 3);
    spec.pairs = 2;
    spec.bounds = static_cast<bench::BoundPattern>(seed % 4);
    const QpProblem p = bench::generate(spec);
    largest = std::max(largest, p.n() + BoundLayout::of(p).total());
    IpmHooks hooks;
    hooks.on_step = [&](const NewtonSnapshot& s) {
      const bench::NewtonSystem sys = bench::assemble_newton(p, s.iterate);
      const Eigen::VectorXd r = fixtures::flatten(s.residuals);
      worst_rhs = std::max(worst_rhs, inf_norm(sys.rhs + r) / std::max(1.0, inf_norm(r)));
      const double rel = (sys.matrix * fixtures::flatten(s.direction) + r).norm() / r.norm();
      if (rel > 1e-8) ++over;
      if (rel > worst) {
        worst = rel;
        worst_at = "seed " + std::to_string(seed) + " iteration " + std::to_string(s.iteration) +
                   ", CG " + (s.pcg.converged() ? "converged" : "stopped") + " at " +
                   std::to_string(s.pcg.iterations) + " iterations with relative residual " +
                   sci(s.pcg.final_relative_residual);
      }
      ++checked;
    };
    const IpmResult res = ipm_solve(p, cfg, hooks);
    o.require(res.status == SolveStatus::kConverged, "seed " + std::to_string(seed) + " " + res.message);
  }
  o.require(largest <= 200, "size");
  o.require(checked >= 50, "iteration count");
  o.require(worst_rhs <= 1e-12, "residual vector mismatch");
  o.require(worst <= 1e-8, "Newton residual");
  o.detail << checked << " iterations over 10 seeds (n + slack rows <= " << largest << "), "
           << over << " above 1e-8, worst relative Newton residual " << sci(worst) << " at "
           << worst_at;
  return o;
}

Outcome reduced_equivalence() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const KktInstance s = random_kkt(3000 + seed, 5 + seed % 20, 1 + seed % 9, 2.0);
    const ResidualSet r = compute_residuals(s.problem, s.layout, s.it);
    const ReducedRhs rhs = reduce_residuals(r, s.it, s.layout);
    Eigen::VectorXd b_reduced(s.op->dim());
    b_reduced << eig(rhs.r1), eig(rhs.r2);
    const Eigen::VectorXd x_reduced = s.reduced().partialPivLu().solve(b_reduced);
    const Eigen::VectorXd x_augmented = s.augmented().llt().solve(eig(s.op->augmented_rhs(rhs)));
    worst = std::max(worst, rel_err(x_augmented, x_reduced));
  }
  o.require(worst <= 1e-10, "disagreement");
  o.detail << "20 iterates, max relative difference " << sci(worst);
  return o;
}

Outcome spd_certificate() {
  Outcome o;
  int factored = 0, failed = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const QpProblem p = bench::generate(fixtures::small_spec(4000 + seed, 20 + seed, 10 + seed,
                                                             static_cast<bench::BoundPattern>(seed % 4),
                                                             static_cast<bench::HessianKind>(seed % 3)));
    IpmHooks hooks;
    hooks.on_step = [&](const NewtonSnapshot& s) {
      const KktInstance k = kkt_at(p, s.iterate);
      Eigen::LLT<Eigen::MatrixXd> llt(k.augmented());
      ++factored;
      failed += llt.info() != Eigen::Success;
    };
    ipm_solve(p, {}, hooks);
  }
  double worst = 0.0;
  int probes = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const KktInstance s = random_kkt(4100 + seed, 25, 10, 3.0);
    Rng rng(seed + 1000);
    for (int k = 0; k < 200; ++k, ++probes) {
      const Vector u = rng.normal_vector(s.op->dim()), v = rng.normal_vector(s.op->dim());
      const Eigen::VectorXd ku = eig(s.op->apply(u)), kv = eig(s.op->apply(v));
      const double scale = std::max(eig(u).norm() * kv.norm(), eig(v).norm() * ku.norm());
      worst = std::max(worst, std::abs(eig(u).dot(kv) - eig(v).dot(ku)) / scale);
    }
  }
  o.require(factored > 0 && failed == 0, "Cholesky failure");
  o.require(worst <= 1e-11, "asymmetry");
  o.detail << factored - failed << "/" << factored << " IPM iterates factor, " << probes
           << " probe pairs, max relative asymmetry " << sci(worst);
  return o;
}

Outcome matrix_free_fidelity() {
  Outcome o;
  double apply_err = 0.0, diag_err = 0.0, jacobi_err = 0.0;
  for (const auto& [n, k] :
       {std::pair<Index, Index>{200, 20}, {200, 0}, {120, 7}, {50, 20}, {10, 1}}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      Rng rng(5000 + seed * 100 + static_cast<std::uint64_t>(n + k));
      const auto h = fixtures::random_bfgs(rng, n, k);
      Eigen::MatrixXd dense = Eigen::VectorXd(eig(h->h0())).asDiagonal();
      for (Index c = 0; c < h->column_count(); ++c) {
        dense += h->weights()[c] * eig(h->column(c)) * eig(h->column(c)).transpose();
      }
      const Vector x = rng.normal_vector(n);
      apply_err = std::max(apply_err, rel_err(h->apply(x), dense * eig(x)));
      diag_err = std::max(diag_err, rel_err(h->diagonal(), dense.diagonal()));
    }
  }
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const KktInstance s = random_kkt(5100 + seed, 20, 8, 3.0);
    jacobi_err = std::max(jacobi_err, rel_err(s.op->jacobi_diagonal(), s.augmented().diagonal()));
  }
  o.require(apply_err <= 1e-12, "BFGS apply");
  o.require(diag_err <= 1e-13, "BFGS diagonal");
  o.require(jacobi_err <= 1e-12, "Jacobi diagonal");
  o.detail << "BFGS apply " << sci(apply_err) << ", diagonal " << sci(diag_err)
           << ", Jacobi diagonal " << sci(jacobi_err);
  return o;
}

Outcome preconditioner_value() {
  Outcome o;
  std::vector<double> with, without;
  double min_spread = kInf;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto sys = fixtures::ill_conditioned_kkt(seed);
    min_spread = std::min(min_spread, sys.diagonal_spread);
    PcgConfig cfg;
    cfg.rel_tolerance = 1e-8;
    cfg.abs_tolerance = 0.0;
    cfg.max_iterations = static_cast<int>(10 * sys.op->dim());
    Vector x(sys.op->dim(), 0.0);
    with.push_back(pcg_solve(*sys.op, sys.op->jacobi_diagonal(), sys.b, x, cfg).iterations);
    std::fill(x.begin(), x.end(), 0.0);
    without.push_back(pcg_solve(*sys.op, Vector(sys.op->dim(), 1.0), sys.b, x, cfg).iterations);
  }
  const double mw = bench::median(with), mo = bench::median(without);
  o.require(min_spread >= 1e6, "diagonal spread");
  o.require(mw < mo, "median");
  o.detail << "20 seeds, min diagonal spread " << sci(min_spread) << ", median CG iterations "
           << mw << " (Jacobi) vs " << mo << " (none)";
  return o;
}

Outcome interior_and_schedule() {
  Outcome o;
  const IpmConfig cfg;
  int iterations = 0, decreases = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    bench::GeneratorSpec spec;
    spec.seed = 6000 + seed;
    spec.n = 1 + static_cast<Index>(seed * 7 % 30);
    spec.m = static_cast<Index>(seed * 5 % 21);
    spec.density = 0.3;
    spec.hessian = static_cast<bench::HessianKind>(seed % 3);
    spec.pairs = 2;
    spec.bounds = static_cast<bench::BoundPattern>(seed % 4);
    const QpProblem p = bench::generate(spec);
    IpmHooks hooks;
    hooks.on_step = [&](const NewtonSnapshot& s) {
      o.require(s.iterate.min_interior() > 0.0, "non-positive slack or multiplier");
    };
    const IpmResult r = ipm_solve(p, cfg, hooks);
    o.require(r.status == SolveStatus::kConverged, "seed " + std::to_string(seed) + " " + r.message);
    const auto& t = r.stats.trace;
    for (std::size_t i = 0; i < t.size(); ++i) {
      ++iterations;
      o.require(t[i].min_interior > 0.0, "non-positive slack or multiplier");
      if (i + 1 < t.size()) {
        if (t[i].mu_decreased) {
          ++decreases;
          o.require(t[i + 1].mu == t[i].mu / 10.0, "mu factor");
        } else {
          o.require(t[i + 1].mu == t[i].mu, "mu changed without an update");
        }
      }
    }
    o.require(r.iterate.min_interior() > 0.0, "final iterate not interior");
    o.require(r.residuals.norm_inf() < r.iterate.mu, "certificate ||r|| < mu");
    o.require(r.iterate.mu <= cfg.mu_tol, "certificate mu <= mu_tol");
  }
  o.detail << "30 solves, " << iterations << " iterations, " << decreases
           << " mu updates, all by exactly 10";
  return o;
}

Outcome sqp_end_to_end() {
  Outcome o;
  {
    SqpConfig cfg;
    cfg.max_iterations = 200;
    const SqpResult r = sqp_solve(fixtures::rosenbrock(5.0), Vector{-1.2, 1.0}, cfg);
    const double err = std::max(std::abs(r.x[0] - 1.0), std::abs(r.x[1] - 1.0));
    o.require(r.status == SqpStatus::kConverged && err <= 1e-5, "Rosenbrock");
    o.detail << "Rosenbrock error " << sci(err) << " in " << r.stats.iterations << " iterations; ";
  }
  int worst_iters = 0;
  double worst_x = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const QpProblem qp = bench::generate(fixtures::small_spec(
        7000 + seed, 8, 5, bench::BoundPattern::kMixed, bench::HessianKind::kDiag));
    const bench::QpReference ref = bench::active_set_oracle(qp);
    SqpConfig cfg;
    cfg.initial_hessian_diag = qp.hessian().diagonal();
    cfg.step_tolerance = 1e-6;
    cfg.kkt_tolerance = 1e-6;
    cfg.max_iterations = 3;
    Vector x0(qp.n());
    for (Index j = 0; j < qp.n(); ++j) x0[j] = std::clamp(0.0, qp.var_lower()[j], qp.var_upper()[j]);
    const SqpResult r = sqp_solve(fixtures::qp_as_nlp(qp), x0, cfg);
    o.require(r.status == SqpStatus::kConverged, "QP-as-NLP seed " + std::to_string(seed));
    worst_iters = std::max(worst_iters, r.stats.iterations);
    worst_x = std::max(worst_x, inf_norm(eig(r.x) - eig(ref.x)));
  }
  o.require(worst_iters <= 3, "QP-as-NLP iterations");
  o.require(worst_x <= 1e-6, "QP-as-NLP solution");
  o.detail << "QP-as-NLP max " << worst_iters << " iterations, x error " << sci(worst_x) << "; ";

  int emitted = 0, convex = 0;
  Rng rng(7);
  const auto watch = [&](int, const QpProblem& qp, const IpmResult&) {
    ++emitted;
    convex += fixtures::convex_on_probes(qp.hessian(), rng, 100);
  };
  SqpConfig cfg;
  cfg.max_iterations = 30;
  sqp_solve(fixtures::rosenbrock(5.0), Vector{-1.2, 1.0}, cfg, watch);
  sqp_solve(bench::dose_like_nlp(3, 200), Vector(200, 0.5), cfg, watch);
  o.require(emitted > 0 && convex == emitted, "subproblem convexity");
  o.detail << convex << "/" << emitted << " subproblems convex on 100 probes";
  return o;
}

Outcome workload_shapes() {
  Outcome o;
  const auto dims = [](const char* name) {
    const QpProblem p = bench::generate(*bench::preset(name));
    return std::pair{p.n(), p.m()};
  };
  const auto pre = dims("proton-hn"), post = dims("proton-hn-post"), vmat = dims("vmat-hn");
  o.require(pre.first == 77373 && post.first == 33531, "proton dimensions");
  o.require(vmat.first == 13425 && vmat.second == 68618, "VMAT dimensions");
  o.detail << "presets " << pre.first << "/" << post.first << "/" << vmat.first << "x"
           << vmat.second << "; ";

  const auto t0 = Clock::now();
  bench::SuiteConfig cfg = bench::SuiteConfig::growth();
  const bench::SuiteReport rep = bench::run_suite(cfg);
  const double secs = seconds_since(t0);
  o.require(rep.failures.empty(), "suite failures");
  const bench::GrowthTrend trend = bench::growth_trend(rep.subproblems);
  o.require(trend.spearman >= 0.6 && trend.late_ms > trend.early_ms, "growth trend");
  o.require(secs < 600.0, "runtime");
  o.detail << rep.subproblems.size() << " subproblems, Spearman " << trend.spearman
           << ", early " << trend.early_ms << " ms, late " << trend.late_ms << " ms, " << secs
           << " s";
  for (const auto& f : rep.failures) o.detail << "; " << f;
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "ipqp_acceptance";
  std::filesystem::create_directories(dir);
  const std::string cli = IPQP_CLI_PATH;
  const std::string problem = (dir / "problem.json").string();
  const std::string a = (dir / "a.json").string(), b = (dir / "b.json").string();
  const std::string gen = cli + " gen --seed 17 --n 400 --m 200 --hessian bfgs --pairs 4" +
                          " --bounds mixed -o " + problem;
  o.require(std::system(gen.c_str()) == 0, "gen");
  for (const auto& out : {a, b}) {
    const std::string cmd = cli + " solve " + problem + " -o " + out;
    o.require(std::system(cmd.c_str()) == 0, "solve");
  }
  const std::string sa = io::read_file(a), sb = io::read_file(b);
  o.require(!sa.empty() && sa == sb, "solution files differ");
  o.detail << "two solve runs, " << sa.size() << " bytes, "
           << (sa == sb ? "byte-identical" : "different");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle-equivalence", oracle_equivalence},
      {"newton-back-substitution", back_substitution},
      {"reduced-system-equivalence", reduced_equivalence},
      {"spd-certificate", spd_certificate},
      {"matrix-free-fidelity", matrix_free_fidelity},
      {"preconditioner-value", preconditioner_value},
      {"interior-and-mu-schedule", interior_and_schedule},
      {"sqp-end-to-end", sqp_end_to_end},
      {"workload-shapes", workload_shapes},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = Clock::now();
    bool pass = false;
    std::string detail;
    try {
      Outcome o = run();
      pass = o.pass;
      detail = o.detail.str();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    failed += !pass;
    std::printf("%s %-28s %s (%.1f s)\n", pass ? "PASS" : "FAIL", name, detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed ? 1 : 0;
}
