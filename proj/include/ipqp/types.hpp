#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ipqp {

using Vector = std::vector<double>;
using Index = std::size_t;

/// Thrown when a caller violates an operation's preconditions (dimension
/// mismatch, malformed sparse structure, non-positive diagonal, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterate leaves the strict interior (zero or negative slack,
/// multiplier or diagonal). Inside the solver this always indicates a bug.
class InteriorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const char* message) {
  if (!condition) throw ContractError(message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace ipqp
