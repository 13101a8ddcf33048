#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ipqp/ipm.hpp"

namespace ipqp::bench {

struct SuiteConfig {
  std::string name = "smoke";
  /// Seeded random QPs: seeds first_seed .. first_seed + qp_count - 1.
  int qp_count = 20;
  std::uint64_t first_seed = 1;
  Index max_n = 50;
  Index max_m = 50;
  /// SQP end-to-end runs on the dose-like NLP, one per seed.
  std::vector<std::uint64_t> sqp_seeds{1, 2};
  Index sqp_n = 50;
  int sqp_iterations = 10;
  /// Timed re-solves per problem after one untimed warm-up; the median is
  /// reported. Zero reports the warm-up time itself.
  int timing_repeats = 5;
  IpmConfig ipm;

  static SuiteConfig smoke();
  /// Subproblem growth workload: n = 2000, 50 SQP iterations, 5 seeds.
  static SuiteConfig growth();
};

struct QpRow {
  std::string problem_id;
  Index n = 0;
  Index m = 0;
  Index nnz = 0;
  int ipm_iterations = 0;
  int cg_iterations = 0;
  double time_ms = 0.0;
  std::string status;
};

struct CgRow {
  std::string problem_id;
  int ipm_iteration = 0;
  int cg_iterations = 0;
};

struct SubproblemRow {
  std::string run_id;
  int sqp_iteration = 0;
  Index pair_count = 0;
  Index n = 0;
  int ipm_iterations = 0;
  int cg_iterations = 0;
  double time_ms = 0.0;
  std::string status;
};

struct SuiteReport {
  std::string name;
  std::vector<QpRow> qp;
  std::vector<CgRow> cg;
  std::vector<SubproblemRow> subproblems;
  std::vector<std::string> failures;
  double total_ms = 0.0;

  /// CSV tables. Without timings the time_ms column is dropped, which makes
  /// the output reproducible byte for byte.
  std::string qp_csv(bool timings = true) const;
  std::string cg_csv() const;
  std::string subproblem_csv(bool timings = true) const;
  std::string summary_csv(bool timings = true) const;
};

SuiteReport run_suite(const SuiteConfig& cfg);

/// Writes qp_suite.csv, cg_per_ipm.csv, sqp_subproblems.csv, summary.csv.
void write_report(const SuiteReport& report, const std::filesystem::path& dir,
                  bool timings = true);

/// Per-iteration median subproblem time across runs, and trend statistics.
struct GrowthTrend {
  std::vector<double> median_ms;  // index i is SQP iteration i + 1
  /// Spearman rank correlation between iteration index and median time.
  double spearman = 0.0;
  /// Medians over the first and last fifth of the iterations.
  double early_ms = 0.0;
  double late_ms = 0.0;
};
GrowthTrend growth_trend(const std::vector<SubproblemRow>& rows);

double spearman(const std::vector<double>& a, const std::vector<double>& b);
double median(std::vector<double> values);

}  // namespace ipqp::bench
