#pragma once

#include <string>
#include <string_view>

#include "ipqp/ipm.hpp"
#include "ipqp/problem.hpp"

namespace ipqp::io {

/// A problem document could not be read. line() is 1-based, 0 if unknown;
/// field() names the offending entry when one can be identified.
class FormatError : public ContractError {
 public:
  FormatError(std::string field, std::size_t line, const std::string& message);
  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

/// JSON problem document; see docs/FORMAT.md. Every QpProblem invariant is
/// checked, and failures are reported as FormatError.
QpProblem parse_problem(std::string_view text);

/// Inverse of parse_problem, bit-exact for every finite double. Dense
/// Hessians are written in CSR form.
std::string write_problem(const QpProblem& problem);

struct SolutionOptions {
  /// Include wall-clock phase timings. Off by default so that repeated runs
  /// produce identical files.
  bool timings = false;
};

std::string write_solution(const IpmResult& result, const IpmConfig& cfg,
                           const SolutionOptions& opts = {});

/// One line-delimited trace record.
std::string trace_record(const IterationTrace& trace);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace ipqp::io
