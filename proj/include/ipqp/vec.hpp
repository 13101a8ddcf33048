#pragma once

// Dense vector kernels. All reductions run left to right in index order so
// results are bit-identical between calls.

#include <algorithm>
#include <cmath>
#include <span>

#include "ipqp/types.hpp"

namespace ipqp::vec {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (Index i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (Index i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// y = alpha * x + beta * y
inline void axpby(double alpha, std::span<const double> x, double beta,
                  std::span<double> y) {
  for (Index i = 0; i < x.size(); ++i) y[i] = alpha * x[i] + beta * y[i];
}

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

inline bool all_positive(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return v > 0.0; });
}

}  // namespace ipqp::vec
