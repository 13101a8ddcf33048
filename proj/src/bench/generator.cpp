#include "ipqp/bench/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "ipqp/bench/rng.hpp"
#include "ipqp/vec.hpp"

namespace ipqp::bench {

std::vector<Index> Rng::sample_sorted(Index n, Index k) {
  require(k <= n, "sample_sorted: k exceeds n");
  std::set<Index> chosen;
  for (Index j = n - k; j < n; ++j) {
    const Index t = index(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

void GeneratorSpec::validate() const {
  require(n > 0, "generator: n must be positive");
  require(density > 0.0 && density <= 1.0, "generator: density must be in (0, 1]");
  require(inf_fraction >= 0.0 && inf_fraction < 1.0, "generator: inf_fraction must be in [0, 1)");
  if (lower_only_rows) require(*lower_only_rows <= m, "generator: lower_only_rows exceeds m");
}

namespace {

Index per_row(double density, Index n) {
  return std::clamp<Index>(static_cast<Index>(std::llround(density * static_cast<double>(n))), 1,
                           n);
}

std::shared_ptr<const SymmetricOperator> make_hessian(const GeneratorSpec& spec, Rng& rng) {
  const Index n = spec.n;
  switch (spec.hessian) {
    case HessianKind::kDiag: {
      Vector d(n);
      for (auto& v : d) v = rng.uniform(0.1, 2.0);
      return std::make_shared<DiagonalOperator>(std::move(d));
    }
    case HessianKind::kCsr: {
      // Symmetric sparse pattern, made positive definite by strict diagonal dominance.
      std::map<std::pair<Index, Index>, double> entries;
      const Index off = n > 1 ? std::min<Index>(n - 1, per_row(spec.density, n) / 2) : 0;
      for (Index i = 0; i < n; ++i) {
        if (off == 0) break;
        for (Index t : rng.sample_sorted(n - 1, off)) {
          const Index j = t >= i ? t + 1 : t;
          const double v = 0.5 * rng.normal();
          entries[{i, j}] += v;
          entries[{j, i}] += v;
        }
      }
      Vector row_abs(n, 0.0);
      for (const auto& [key, v] : entries) row_abs[key.first] += std::abs(v);
      for (Index i = 0; i < n; ++i) entries[{i, i}] = row_abs[i] + rng.uniform(0.1, 1.0);
      std::vector<Index> offsets(n + 1, 0);
      std::vector<Index> cols;
      Vector vals;
      cols.reserve(entries.size());
      vals.reserve(entries.size());
      for (const auto& [key, v] : entries) {
        ++offsets[key.first + 1];
        cols.push_back(key.second);
        vals.push_back(v);
      }
      for (Index i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
      return std::make_shared<CsrSymmetricOperator>(
          CsrMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals)));
    }
    case HessianKind::kBfgs: {
      auto op = std::make_shared<const BfgsOperator>(Vector(n, rng.uniform(0.5, 2.0)));
      for (Index k = 0; k < spec.pairs; ++k) {
        Vector s = rng.normal_vector(n);
        Vector y(n);
        for (Index j = 0; j < n; ++j) y[j] = rng.uniform(0.2, 5.0) * s[j] + 0.1 * rng.normal();
        if (vec::norm_inf(s) == 0.0) s[0] = 1.0;
        op = bfgs_update(op, s, y).op;
      }
      return op;
    }
  }
  throw ContractError("generator: unknown Hessian kind");
}

}  // namespace

QpProblem generate(const GeneratorSpec& spec) {
  spec.validate();
  const Index n = spec.n;
  const Index m = spec.m;
  Rng rng(spec.seed);
  const bool one_sided = spec.bounds == BoundPattern::kOneSided;
  const bool nonneg = spec.nonnegative || one_sided;

  // Reference point every finite bound is built around, so the feasible set
  // always has an interior.
  Vector x_ref(n);
  for (auto& v : x_ref) v = nonneg ? rng.uniform(0.5, 1.5) : 0.5 * rng.normal();

  auto finite_draw = [&]() {
    return spec.bounds != BoundPattern::kMixed || rng.uniform() >= spec.inf_fraction;
  };

  Vector var_lower(n, -kInf), var_upper(n, kInf);
  for (Index j = 0; j < n; ++j) {
    const double wl = rng.uniform(0.5, 1.5);
    const double wu = rng.uniform(0.5, 1.5);
    switch (spec.bounds) {
      case BoundPattern::kTwoSided:
        var_lower[j] = x_ref[j] - wl;
        var_upper[j] = x_ref[j] + wu;
        break;
      case BoundPattern::kLowerOnly:
        var_lower[j] = x_ref[j] - wl;
        break;
      case BoundPattern::kMixed:
        if (finite_draw()) var_lower[j] = x_ref[j] - wl;
        if (finite_draw()) var_upper[j] = x_ref[j] + wu;
        break;
      case BoundPattern::kOneSided:
        var_lower[j] = 0.0;
        break;
    }
  }

  const Index k = per_row(spec.density, n);
  std::vector<Index> offsets(m + 1, 0);
  std::vector<Index> cols;
  Vector vals;
  cols.reserve(m * k);
  vals.reserve(m * k);
  for (Index i = 0; i < m; ++i) {
    for (Index j : rng.sample_sorted(n, k)) {
      cols.push_back(j);
      vals.push_back(nonneg ? rng.uniform(0.1, 1.0) : rng.normal());
    }
    offsets[i + 1] = cols.size();
  }
  auto a = std::make_shared<const CsrMatrix>(m, n, std::move(offsets), std::move(cols),
                                             std::move(vals));
  const Vector ax = a->apply(x_ref);

  const Index lower_rows = spec.lower_only_rows.value_or(m / 4);
  Vector lin_lower(m, -kInf), lin_upper(m, kInf);
  for (Index i = 0; i < m; ++i) {
    const double wl = rng.uniform(0.5, 1.5);
    const double wu = rng.uniform(0.5, 1.5);
    switch (spec.bounds) {
      case BoundPattern::kTwoSided:
        lin_lower[i] = ax[i] - wl;
        lin_upper[i] = ax[i] + wu;
        break;
      case BoundPattern::kLowerOnly:
        lin_lower[i] = ax[i] - wl;
        break;
      case BoundPattern::kMixed:
        if (finite_draw()) lin_lower[i] = ax[i] - wl;
        if (finite_draw()) lin_upper[i] = ax[i] + wu;
        break;
      case BoundPattern::kOneSided:
        if (i < lower_rows) {
          lin_lower[i] = ax[i] - wl;
        } else {
          lin_upper[i] = ax[i] + wu;
        }
        break;
    }
  }
  // A problem with no finite bound at all is rejected, so pin one.
  if (spec.bounds == BoundPattern::kMixed) {
    const auto finite = [](const Vector& v) {
      return std::any_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(var_lower) && !finite(var_upper) && !finite(lin_lower) && !finite(lin_upper)) {
      var_lower[0] = x_ref[0] - 1.0;
    }
  }

  Vector p = rng.normal_vector(n);
  auto hessian = make_hessian(spec, rng);
  return QpProblem(std::move(hessian), std::move(p), std::move(a), std::move(lin_lower),
                   std::move(lin_upper), std::move(var_lower), std::move(var_upper));
}

std::optional<GeneratorSpec> preset(std::string_view name, std::uint64_t seed, Index pairs) {
  GeneratorSpec spec;
  spec.seed = seed;
  spec.hessian = HessianKind::kBfgs;
  spec.pairs = pairs;
  spec.bounds = BoundPattern::kOneSided;
  spec.nonnegative = true;
  if (name == "proton-hn") {
    spec.n = 77373;
    spec.m = 0;
  } else if (name == "proton-hn-post") {
    spec.n = 33531;
    spec.m = 0;
  } else if (name == "vmat-hn") {
    spec.n = 13425;
    spec.m = 68618;
    spec.lower_only_rows = 15751;
    spec.density = 8.0 / 13425.0;
  } else {
    return std::nullopt;
  }
  if (spec.m == 0) spec.density = 1.0 / static_cast<double>(spec.n);
  return spec;
}

std::vector<std::string> preset_names() { return {"proton-hn", "proton-hn-post", "vmat-hn"}; }

HessianKind parse_hessian_kind(std::string_view name) {
  if (name == "diag") return HessianKind::kDiag;
  if (name == "csr") return HessianKind::kCsr;
  if (name == "bfgs") return HessianKind::kBfgs;
  throw ContractError("unknown Hessian kind '" + std::string(name) + "' (diag|csr|bfgs)");
}

BoundPattern parse_bound_pattern(std::string_view name) {
  if (name == "two-sided") return BoundPattern::kTwoSided;
  if (name == "lower-only") return BoundPattern::kLowerOnly;
  if (name == "mixed") return BoundPattern::kMixed;
  if (name == "one-sided") return BoundPattern::kOneSided;
  throw ContractError("unknown bound pattern '" + std::string(name) +
                      "' (two-sided|lower-only|mixed|one-sided)");
}

const char* to_string(HessianKind kind) {
  switch (kind) {
    case HessianKind::kDiag:
      return "diag";
    case HessianKind::kCsr:
      return "csr";
    case HessianKind::kBfgs:
      return "bfgs";
  }
  return "?";
}

const char* to_string(BoundPattern pattern) {
  switch (pattern) {
    case BoundPattern::kTwoSided:
      return "two-sided";
    case BoundPattern::kLowerOnly:
      return "lower-only";
    case BoundPattern::kMixed:
      return "mixed";
    case BoundPattern::kOneSided:
      return "one-sided";
  }
  return "?";
}

NlpProblem dose_like_nlp(std::uint64_t seed, Index n) {
  require(n > 0, "dose_like_nlp: n must be positive");
  Rng rng(seed);
  const Index voxels = 2 * n;
  const Index per_voxel = std::min<Index>(n, 10);
  auto d = std::make_shared<CsrMatrix>([&] {
    std::vector<Index> offsets(voxels + 1, 0);
    std::vector<Index> cols;
    Vector vals;
    for (Index i = 0; i < voxels; ++i) {
      for (Index j : rng.sample_sorted(n, per_voxel)) {
        cols.push_back(j);
        vals.push_back(rng.uniform(0.1, 1.0));
      }
      offsets[i + 1] = cols.size();
    }
    return CsrMatrix(voxels, n, std::move(offsets), std::move(cols), std::move(vals));
  }());
  // First half: targets with a prescription; second half: organs with a dose limit.
  auto level = std::make_shared<Vector>(voxels);
  for (Index i = 0; i < voxels; ++i) {
    (*level)[i] = (i < n ? 1.0 : 0.4) * rng.uniform(0.8, 1.2) * static_cast<double>(per_voxel) *
                  0.55;
  }
  const double scale = 1.0 / static_cast<double>(voxels);

  NlpProblem nlp;
  nlp.n = n;
  nlp.m = 0;
  nlp.var_lower.assign(n, 0.0);
  nlp.var_upper.assign(n, kInf);
  nlp.objective = [d, level, n, scale](std::span<const double> x, std::span<double> grad) {
    const Vector dose = d->apply(x);
    Vector w(dose.size(), 0.0);
    double f = 0.0;
    for (Index i = 0; i < dose.size(); ++i) {
      double e = dose[i] - (*level)[i];
      if (i >= n && e < 0.0) e = 0.0;
      f += e * e;
      w[i] = 2.0 * scale * e;
    }
    Vector g(n);
    d->apply_transpose(w, g);
    std::copy(g.begin(), g.end(), grad.begin());
    return scale * f;
  };
  return nlp;
}

}  // namespace ipqp::bench
