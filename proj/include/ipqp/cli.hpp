#pragma once

#include <iosfwd>

namespace ipqp::cli {

enum ExitCode : int {
  kOk = 0,
  kIterationLimit = 1,
  kUsage = 2,
  kInvalidProblem = 3,
  kSolverError = 4,
  kIoError = 5,
};

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace ipqp::cli
