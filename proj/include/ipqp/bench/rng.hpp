#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ipqp/types.hpp"

namespace ipqp::bench {

/// Seeded variate source with a fully specified stream: std::mt19937_64
/// (whose output sequence the C++ standard fixes) and arithmetic-only
/// transforms, so generated problems are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// (next() >> 11) * 2^-53, in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Irwin-Hall approximation of a standard normal: sum of 12 uniforms - 6.
  double normal() {
    double sum = 0.0;
    for (int i = 0; i < 12; ++i) sum += uniform();
    return sum - 6.0;
  }

  /// floor(uniform() * n), in [0, n).
  Index index(Index n) { return static_cast<Index>(uniform() * static_cast<double>(n)); }

  /// k distinct values from [0, n) in increasing order (Floyd's algorithm).
  std::vector<Index> sample_sorted(Index n, Index k);

  Vector normal_vector(Index n) {
    Vector v(n);
    for (auto& x : v) x = normal();
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ipqp::bench
