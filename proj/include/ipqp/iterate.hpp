#pragma once

#include <array>

#include "ipqp/problem.hpp"

namespace ipqp {

/// One value per bound family: linear-constraint lower / upper sides and
/// variable lower / upper bounds.
template <typename T>
struct PerFamily {
  T lin_lower{};
  T lin_upper{};
  T var_lower{};
  T var_upper{};

  std::array<T*, 4> all() { return {&lin_lower, &lin_upper, &var_lower, &var_upper}; }
  std::array<const T*, 4> all() const {
    return {&lin_lower, &lin_upper, &var_lower, &var_upper};
  }
};

/// Per-family vectors sized from a layout, filled with `value`.
PerFamily<Vector> family_vectors(const BoundLayout& layout, double value);

struct IterateState {
  Vector x;
  PerFamily<Vector> slack;
  PerFamily<Vector> mult;
  double mu = 0.0;

  /// Smallest slack or multiplier over all families (+inf when there are none).
  double min_interior() const;
};

/// Perturbed optimality residuals.
///
///   dual       = Hx + p - A_L^T lam_lA + A_U^T lam_uA - lam_lx + lam_ux
///   lin_lower  = A_L x - s_lA - l        lin_upper = u - A_U x - s_uA
///   var_lower  = x - s_lx - a            var_upper = b - x - s_ux
///   comp       = lam .* s - mu (per family)
struct ResidualSet {
  Vector dual;
  PerFamily<Vector> primal;
  PerFamily<Vector> comp;

  double dual_inf() const;
  double primal_inf() const;
  double comp_inf() const;
  double norm_inf() const;
  /// Euclidean norm over every family.
  double norm2() const;
  bool finite() const;
};

/// Full Newton direction.
struct StepDirection {
  Vector dx;
  PerFamily<Vector> dslack;
  PerFamily<Vector> dmult;
};

}  // namespace ipqp
