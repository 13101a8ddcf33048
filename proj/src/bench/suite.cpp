#include "ipqp/bench/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "ipqp/bench/generator.hpp"
#include "ipqp/sqp.hpp"

namespace ipqp::bench {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt_ms(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", ms);
  return buf;
}

// Warm-up (already done by the caller) excluded; median of the timed repeats.
double timed_median(const QpProblem& qp, const IpmConfig& cfg, int repeats, double warmup_ms) {
  if (repeats <= 0) return warmup_ms;
  std::vector<double> times;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    (void)ipm_solve(qp, cfg);
    times.push_back(ms_since(t0));
  }
  return median(std::move(times));
}

GeneratorSpec suite_spec(const SuiteConfig& cfg, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.seed = seed;
  spec.n = 2 + static_cast<Index>(seed * 7 % std::max<Index>(cfg.max_n - 1, 1));
  spec.m = static_cast<Index>(seed * 5 % (cfg.max_m + 1));
  spec.density = 0.2;
  spec.hessian = static_cast<HessianKind>(seed % 3);
  spec.pairs = seed % 4;
  spec.bounds = static_cast<BoundPattern>(seed % 4);
  spec.nonnegative = spec.bounds == BoundPattern::kOneSided;
  return spec;
}

}  // namespace

SuiteConfig SuiteConfig::smoke() { return {}; }

SuiteConfig SuiteConfig::growth() {
  SuiteConfig cfg;
  cfg.name = "growth";
  cfg.qp_count = 0;
  cfg.sqp_seeds = {1, 2, 3, 4, 5};
  cfg.sqp_n = 2000;
  cfg.sqp_iterations = 50;
  return cfg;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t h = values.size() / 2;
  return values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size() && a.size() >= 2, "spearman: need two equal-length samples");
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

GrowthTrend growth_trend(const std::vector<SubproblemRow>& rows) {
  std::map<int, std::vector<double>> by_iter;
  for (const auto& r : rows) by_iter[r.sqp_iteration].push_back(r.time_ms);
  GrowthTrend t;
  std::vector<double> idx;
  for (auto& [it, times] : by_iter) {
    idx.push_back(it);
    t.median_ms.push_back(median(times));
  }
  if (t.median_ms.size() >= 2) t.spearman = spearman(idx, t.median_ms);
  const std::size_t w = std::max<std::size_t>(1, t.median_ms.size() / 5);
  if (!t.median_ms.empty()) {
    t.early_ms = median({t.median_ms.begin(), t.median_ms.begin() + static_cast<long>(w)});
    t.late_ms = median({t.median_ms.end() - static_cast<long>(w), t.median_ms.end()});
  }
  return t;
}

SuiteReport run_suite(const SuiteConfig& cfg) {
  const auto suite_t0 = Clock::now();
  SuiteReport rep;
  rep.name = cfg.name;

  for (int q = 0; q < cfg.qp_count; ++q) {
    const std::uint64_t seed = cfg.first_seed + static_cast<std::uint64_t>(q);
    const std::string id = "qp-" + std::to_string(seed);
    try {
      const QpProblem qp = generate(suite_spec(cfg, seed));
      const auto t0 = Clock::now();
      const IpmResult res = ipm_solve(qp, cfg.ipm);
      const double warm = ms_since(t0);
      QpRow row{id,
                qp.n(),
                qp.m(),
                qp.constraints().nnz(),
                res.stats.ipm_iterations,
                res.stats.cg_iterations,
                timed_median(qp, cfg.ipm, cfg.timing_repeats, warm),
                to_string(res.status)};
      rep.qp.push_back(row);
      for (const auto& tr : res.stats.trace) {
        rep.cg.push_back({id, tr.iteration, tr.cg_iterations});
      }
      if (res.status != SolveStatus::kConverged) rep.failures.push_back(id + ": " + row.status);
    } catch (const std::exception& e) {
      rep.failures.push_back(id + ": " + e.what());
    }
  }

  for (const std::uint64_t seed : cfg.sqp_seeds) {
    const std::string id = "sqp-" + std::to_string(seed);
    try {
      const NlpProblem nlp = dose_like_nlp(seed, cfg.sqp_n);
      SqpConfig scfg;
      scfg.max_iterations = cfg.sqp_iterations;
      scfg.step_tolerance = 0.0;
      scfg.kkt_tolerance = 0.0;
      scfg.ipm = cfg.ipm;
      const Vector x0(cfg.sqp_n, 0.5);
      std::vector<SubproblemRow> rows;
      const SqpResult res = sqp_solve(
          nlp, x0, scfg, [&](int iter, const QpProblem& qp, const IpmResult& sol) {
            const auto* h = dynamic_cast<const BfgsOperator*>(&qp.hessian());
            SubproblemRow row;
            row.run_id = id;
            row.sqp_iteration = iter;
            row.pair_count = h ? h->pair_count() : 0;
            row.n = qp.n();
            row.ipm_iterations = sol.stats.ipm_iterations;
            row.cg_iterations = sol.stats.cg_iterations;
            row.time_ms = cfg.timing_repeats > 0
                              ? timed_median(qp, cfg.ipm, cfg.timing_repeats, 0.0)
                              : sol.stats.timings.total_ms;
            row.status = to_string(sol.status);
            rows.push_back(row);
          });
      rep.subproblems.insert(rep.subproblems.end(), rows.begin(), rows.end());
      if (res.status == SqpStatus::kSubproblemFailure) {
        rep.failures.push_back(id + ": " + res.message);
      }
    } catch (const std::exception& e) {
      rep.failures.push_back(id + ": " + e.what());
    }
  }
  rep.total_ms = ms_since(suite_t0);
  return rep;
}

std::string SuiteReport::qp_csv(bool timings) const {
  std::string out = timings ? "problem_id,n,m,nnz,ipm_iters,cg_iters_total,time_ms,status\n"
                            : "problem_id,n,m,nnz,ipm_iters,cg_iters_total,status\n";
  for (const auto& r : qp) {
    out += r.problem_id + "," + std::to_string(r.n) + "," + std::to_string(r.m) + "," +
           std::to_string(r.nnz) + "," + std::to_string(r.ipm_iterations) + "," +
           std::to_string(r.cg_iterations) + ",";
    if (timings) out += fmt_ms(r.time_ms) + ",";
    out += r.status + "\n";
  }
  return out;
}

std::string SuiteReport::cg_csv() const {
  std::string out = "problem_id,ipm_iter,cg_iters\n";
  for (const auto& r : cg) {
    out += r.problem_id + "," + std::to_string(r.ipm_iteration) + "," +
           std::to_string(r.cg_iterations) + "\n";
  }
  return out;
}

std::string SuiteReport::subproblem_csv(bool timings) const {
  std::string out = timings
                        ? "run_id,sqp_iter,bfgs_pairs,n,ipm_iters,cg_iters_total,time_ms,status\n"
                        : "run_id,sqp_iter,bfgs_pairs,n,ipm_iters,cg_iters_total,status\n";
  for (const auto& r : subproblems) {
    out += r.run_id + "," + std::to_string(r.sqp_iteration) + "," +
           std::to_string(r.pair_count) + "," + std::to_string(r.n) + "," +
           std::to_string(r.ipm_iterations) + "," + std::to_string(r.cg_iterations) + ",";
    if (timings) out += fmt_ms(r.time_ms) + ",";
    out += r.status + "\n";
  }
  return out;
}

std::string SuiteReport::summary_csv(bool timings) const {
  long ipm = 0, cgs = 0;
  double qp_ms = 0.0, sub_ms = 0.0;
  for (const auto& r : qp) {
    ipm += r.ipm_iterations;
    cgs += r.cg_iterations;
    qp_ms += r.time_ms;
  }
  for (const auto& r : subproblems) {
    ipm += r.ipm_iterations;
    cgs += r.cg_iterations;
    sub_ms += r.time_ms;
  }
  std::string out = "suite,qp_problems,subproblems,failures,ipm_iters_total,cg_iters_total";
  out += timings ? ",qp_time_ms,subproblem_time_ms,wall_ms\n" : "\n";
  out += name + "," + std::to_string(qp.size()) + "," + std::to_string(subproblems.size()) +
         "," + std::to_string(failures.size()) + "," + std::to_string(ipm) + "," +
         std::to_string(cgs);
  if (timings) out += "," + fmt_ms(qp_ms) + "," + fmt_ms(sub_ms) + "," + fmt_ms(total_ms);
  out += "\n";
  return out;
}

void write_report(const SuiteReport& report, const std::filesystem::path& dir, bool timings) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& body) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << body;
  };
  put("qp_suite.csv", report.qp_csv(timings));
  put("cg_per_ipm.csv", report.cg_csv());
  put("sqp_subproblems.csv", report.subproblem_csv(timings));
  put("summary.csv", report.summary_csv(timings));
}

}  // namespace ipqp::bench
