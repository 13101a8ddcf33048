#include "ipqp/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <optional>

#include "ipqp/bench/generator.hpp"
#include "ipqp/bench/oracle.hpp"
#include "ipqp/bench/suite.hpp"
#include "ipqp/probio.hpp"

namespace ipqp::cli {

namespace {

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

QpProblem load(const std::string& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const std::exception& e) {
    throw IoFailure(e.what());
  }
  return io::parse_problem(text);
}

void emit(const std::string& path, const std::string& body, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << body;
    return;
  }
  try {
    io::write_file(path, body);
  } catch (const std::exception& e) {
    throw IoFailure(e.what());
  }
}

const char* hessian_kind(const SymmetricOperator& h) {
  if (dynamic_cast<const DiagonalOperator*>(&h)) return "diag";
  if (dynamic_cast<const CsrSymmetricOperator*>(&h)) return "csr";
  if (dynamic_cast<const DenseSymmetricOperator*>(&h)) return "dense";
  if (dynamic_cast<const BfgsOperator*>(&h)) return "bfgs";
  return "operator";
}

struct SolveArgs {
  std::string problem;
  std::string out;
  std::optional<double> mu_tol, tau, pcg_rtol;
  std::optional<int> max_iter;
  bool trace = false;
  bool timings = false;
};

int run_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const QpProblem problem = load(a.problem);
  IpmConfig cfg;
  if (a.mu_tol) cfg.mu_tol = *a.mu_tol;
  if (a.tau) cfg.tau = *a.tau;
  if (a.max_iter) cfg.max_iterations = *a.max_iter;
  if (a.pcg_rtol) cfg.pcg_rel_tolerance = *a.pcg_rtol;
  try {
    cfg.validate();
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  IpmHooks hooks;
  if (a.trace) {
    hooks.on_iteration = [&err](const IterationTrace& t) { err << io::trace_record(t) << "\n"; };
  }
  const IpmResult result = ipm_solve(problem, cfg, hooks);
  emit(a.out, io::write_solution(result, cfg, {a.timings}), out);
  switch (result.status) {
    case SolveStatus::kConverged:
      return kOk;
    case SolveStatus::kIterationLimit:
      err << "warning: " << result.message << "\n";
      return kIterationLimit;
    case SolveStatus::kError:
      break;
  }
  err << "error: " << result.message << "\n";
  return kSolverError;
}

int run_check(const std::string& path, std::ostream& out) {
  const QpProblem problem = load(path);
  const BoundLayout layout = BoundLayout::of(problem);
  out << "n=" << problem.n() << "\n"
      << "m=" << problem.m() << "\n"
      << "variables=" << problem.n() << "\n"
      << "linear constraints=" << problem.m() << " (lower " << layout.lin_lower.size()
      << ", upper " << layout.lin_upper.size() << ")\n"
      << "bound constraints=" << layout.bounded_variables << "\n"
      << "hessian=" << hessian_kind(problem.hessian()) << "\n"
      << "nnz(A)=" << problem.constraints().nnz() << "\n";
  return kOk;
}

int run_oracle(const std::string& path, std::ostream& out, std::ostream& err) {
  const QpProblem problem = load(path);
  const BoundLayout layout = BoundLayout::of(problem);
  if (problem.n() + layout.total() > 2000) {
    err << "error: oracle is limited to n + finite bounds <= 2000\n";
    return kInvalidProblem;
  }
  bench::QpReference ref;
  try {
    ref = bench::active_set_oracle(problem);
  } catch (const bench::OracleError& e) {
    err << "error: " << e.what() << "\n";
    return kSolverError;
  }
  out << "active constraints=" << ref.active << "\n"
      << "kkt error=" << ref.kkt_error << "\n"
      << "objective=" << ref.objective << "\n"
      << "x=";
  for (Index j = 0; j < ref.x.size(); ++j) out << (j ? "," : "") << ref.x[j];
  out << "\n";
  return kOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Matrix-free interior point QP solver", "ipqp"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Solve a problem file");
  solve->add_option("problem", sa.problem, "Problem file")->required();
  solve->add_option("--mu-tol", sa.mu_tol, "Barrier parameter tolerance");
  solve->add_option("--tau", sa.tau, "Fraction-to-boundary factor");
  solve->add_option("--max-iter", sa.max_iter, "Maximum IPM iterations");
  solve->add_option("--pcg-rtol", sa.pcg_rtol, "Fixed CG relative tolerance");
  solve->add_flag("--trace", sa.trace, "Per-iteration records on stderr, one JSON per line");
  solve->add_option("--out,-o", sa.out, "Solution file (default stdout)");
  solve->add_flag("--timings", sa.timings, "Include wall-clock timings in the solution");

  std::string check_path;
  auto* check = app.add_subcommand("check", "Validate a problem file and print its dimensions");
  check->add_option("problem", check_path, "Problem file")->required();

  bench::GeneratorSpec gs;
  std::string gen_hessian = "diag", gen_bounds = "two-sided", gen_out;
  auto* gen = app.add_subcommand("gen", "Write a seeded random problem");
  gen->add_option("--seed", gs.seed, "Seed");
  gen->add_option("--n", gs.n, "Variables");
  gen->add_option("--m", gs.m, "Linear constraints");
  gen->add_option("--density", gs.density, "Nonzero fraction per constraint row");
  gen->add_option("--hessian", gen_hessian, "diag | csr | bfgs");
  gen->add_option("--pairs", gs.pairs, "BFGS update pairs");
  gen->add_option("--bounds", gen_bounds, "two-sided | lower-only | mixed | one-sided");
  gen->add_option("--inf-fraction", gs.inf_fraction, "Infinite bound probability (mixed)");
  gen->add_flag("--nonnegative", gs.nonnegative, "Nonnegative constraint coefficients");
  gen->add_option("--out,-o", gen_out, "Problem file (default stdout)");

  std::string preset, suite, bench_out, out_dir = "bench-results";
  std::uint64_t bench_seed = 1;
  Index bench_pairs = 2;
  bool no_timings = false;
  auto* bench_cmd = app.add_subcommand("bench", "Workload presets and the benchmark suite");
  auto* preset_opt =
      bench_cmd->add_option("--preset", preset, "proton-hn | proton-hn-post | vmat-hn");
  auto* suite_opt = bench_cmd->add_option("--suite", suite, "smoke | growth");
  preset_opt->excludes(suite_opt);
  bench_cmd->add_option("--seed", bench_seed, "Preset seed");
  bench_cmd->add_option("--pairs", bench_pairs, "Preset BFGS update pairs");
  bench_cmd->add_option("--out,-o", bench_out, "Preset problem file (default stdout)");
  bench_cmd->add_option("--out-dir", out_dir, "Suite report directory");
  bench_cmd->add_flag("--no-timings", no_timings, "Drop timing columns from the suite tables");

  std::string oracle_path;
  auto* oracle = app.add_subcommand("oracle", "Dense reference solve (small problems)");
  oracle->add_option("problem", oracle_path, "Problem file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    err << "error: " << e.what() << "\n\n" << target->help();
    return kUsage;
  }

  try {
    if (solve->parsed()) return run_solve(sa, out, err);
    if (check->parsed()) return run_check(check_path, out);
    if (oracle->parsed()) return run_oracle(oracle_path, out, err);
    if (gen->parsed()) {
      try {
        gs.hessian = bench::parse_hessian_kind(gen_hessian);
        gs.bounds = bench::parse_bound_pattern(gen_bounds);
        gs.validate();
      } catch (const ContractError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
      }
      emit(gen_out, io::write_problem(bench::generate(gs)), out);
      return kOk;
    }
    if (bench_cmd->parsed()) {
      if (!preset.empty()) {
        const auto spec = bench::preset(preset, bench_seed, bench_pairs);
        if (!spec) {
          err << "error: unknown preset '" << preset << "'\n\n" << bench_cmd->help();
          return kUsage;
        }
        emit(bench_out, io::write_problem(bench::generate(*spec)), out);
        return kOk;
      }
      if (suite.empty()) {
        err << "error: bench needs --preset or --suite\n\n" << bench_cmd->help();
        return kUsage;
      }
      bench::SuiteConfig cfg;
      if (suite == "smoke") {
        cfg = bench::SuiteConfig::smoke();
      } else if (suite == "growth") {
        cfg = bench::SuiteConfig::growth();
      } else {
        err << "error: unknown suite '" << suite << "'\n\n" << bench_cmd->help();
        return kUsage;
      }
      const bench::SuiteReport rep = bench::run_suite(cfg);
      try {
        bench::write_report(rep, out_dir, !no_timings);
      } catch (const std::exception& e) {
        throw IoFailure(e.what());
      }
      out << rep.summary_csv(!no_timings);
      if (!rep.subproblems.empty()) {
        const auto trend = bench::growth_trend(rep.subproblems);
        out << "subproblem time trend: spearman=" << trend.spearman
            << " early_ms=" << trend.early_ms << " late_ms=" << trend.late_ms << "\n";
      }
      for (const auto& f : rep.failures) err << "failure: " << f << "\n";
      return rep.failures.empty() ? kOk : kSolverError;
    }
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const io::FormatError& e) {
    err << "invalid problem: " << e.what() << "\n";
    return kInvalidProblem;
  } catch (const ProblemError& e) {
    err << "invalid problem: " << e.what() << "\n";
    return kInvalidProblem;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSolverError;
  }
  return kUsage;
}

int cli_main(int argc, const char* const* argv) {
  return cli_main(argc, argv, std::cout, std::cerr);
}

}  // namespace ipqp::cli
