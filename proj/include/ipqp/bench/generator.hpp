#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ipqp/problem.hpp"
#include "ipqp/sqp.hpp"

namespace ipqp::bench {

enum class HessianKind { kDiag, kCsr, kBfgs };

enum class BoundPattern {
  /// Every l, u, a, b finite.
  kTwoSided,
  /// Only l and a finite.
  kLowerOnly,
  /// Each bound independently infinite with probability inf_fraction.
  kMixed,
  /// Dose-like: x >= 0 only; the first lower_only_rows rows carry a lower
  /// bound, the remaining rows an upper bound.
  kOneSided,
};

struct GeneratorSpec {
  std::uint64_t seed = 1;
  Index n = 10;
  Index m = 5;
  /// Fraction of nonzeros per constraint row (at least one per row).
  double density = 0.3;
  HessianKind hessian = HessianKind::kDiag;
  /// BFGS update pairs (hessian == kBfgs).
  Index pairs = 0;
  BoundPattern bounds = BoundPattern::kTwoSided;
  double inf_fraction = 0.25;
  /// Nonnegative constraint coefficients (dose-deposition-like).
  bool nonnegative = false;
  /// kOneSided only; defaults to m / 4.
  std::optional<Index> lower_only_rows;

  void validate() const;
};

/// Pure function of the spec.
QpProblem generate(const GeneratorSpec& spec);

/// Named workload shapes: proton-hn, proton-hn-post, vmat-hn.
std::optional<GeneratorSpec> preset(std::string_view name, std::uint64_t seed = 1,
                                    Index pairs = 2);
std::vector<std::string> preset_names();

HessianKind parse_hessian_kind(std::string_view name);
BoundPattern parse_bound_pattern(std::string_view name);
const char* to_string(HessianKind kind);
const char* to_string(BoundPattern pattern);

/// Bound-constrained, dose-like smooth NLP with x >= 0: quadratic penalties
/// on under/over-dosed voxels of d = D x, D nonnegative and sparse with
/// 2n voxels. The SQP workload used for the subproblem-growth study.
NlpProblem dose_like_nlp(std::uint64_t seed, Index n);

}  // namespace ipqp::bench
