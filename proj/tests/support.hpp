#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>

#include "ipqp/bench/generator.hpp"
#include "ipqp/bench/rng.hpp"
#include "ipqp/linops.hpp"

namespace ipqp::fixtures {

inline Eigen::VectorXd eig(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Vector vec_of(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

/// ||a - b||_inf / max(1e-300, ||b||_inf)
inline double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(1e-300, b.lpNorm<Eigen::Infinity>());
}
inline double rel_err(std::span<const double> a, const Eigen::VectorXd& b) {
  return rel_err(eig(a), b);
}

inline CsrMatrix random_csr(bench::Rng& rng, Index rows, Index cols, double density) {
  std::vector<Index> offsets{0}, idx;
  Vector vals;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (rng.uniform() < density) {
        idx.push_back(j);
        vals.push_back(rng.normal());
      }
    }
    offsets.push_back(idx.size());
  }
  return CsrMatrix(rows, cols, std::move(offsets), std::move(idx), std::move(vals));
}

inline std::shared_ptr<const BfgsOperator> random_bfgs(bench::Rng& rng, Index n, Index k) {
  Vector h0(n), u(2 * k * n), w(2 * k);
  for (auto& v : h0) v = rng.uniform(0.5, 2.0);
  for (auto& v : u) v = rng.normal();
  for (auto& v : w) v = rng.uniform(-1.0, 1.0);
  return std::make_shared<BfgsOperator>(std::move(h0), std::move(u), std::move(w));
}

}  // namespace ipqp::fixtures

#include "ipqp/iterate.hpp"

namespace ipqp::fixtures {

/// Random interior iterate: slacks and multipliers 10^U(-spread, spread).
inline IterateState random_iterate(const QpProblem& problem, bench::Rng& rng,
                                   double spread = 1.0, double mu = 0.1) {
  const BoundLayout layout = BoundLayout::of(problem);
  IterateState it;
  it.x = rng.normal_vector(problem.n());
  it.slack = family_vectors(layout, 1.0);
  it.mult = family_vectors(layout, 1.0);
  for (auto* fam : it.slack.all())
    for (auto& v : *fam) v = std::pow(10.0, rng.uniform(-spread, spread));
  for (auto* fam : it.mult.all())
    for (auto& v : *fam) v = std::pow(10.0, rng.uniform(-spread, spread));
  it.mu = mu;
  return it;
}

inline bench::GeneratorSpec small_spec(std::uint64_t seed, Index n, Index m,
                                       bench::BoundPattern bounds = bench::BoundPattern::kTwoSided,
                                       bench::HessianKind hessian = bench::HessianKind::kCsr) {
  bench::GeneratorSpec spec;
  spec.seed = seed;
  spec.n = n;
  spec.m = m;
  spec.density = 0.4;
  spec.bounds = bounds;
  spec.hessian = hessian;
  spec.pairs = 3;
  return spec;
}

}  // namespace ipqp::fixtures

#include "ipqp/kkt.hpp"

namespace ipqp::fixtures {

/// KKT operator at a random interior iterate whose slacks and multipliers
/// span 10^-3 .. 10^3, plus a random right-hand side.
struct IllConditionedSystem {
  std::shared_ptr<KktOperator> op;
  Vector b;
  double diagonal_spread = 0.0;
};

inline IllConditionedSystem ill_conditioned_kkt(std::uint64_t seed) {
  const QpProblem problem = bench::generate(small_spec(seed, 40, 20));
  const BoundLayout layout = BoundLayout::of(problem);
  bench::Rng rng(seed * 977 + 1);
  const IterateState it = random_iterate(problem, rng, 3.0);
  const IterateDiagonals d = iterate_diagonals(it, layout, problem.n());
  IllConditionedSystem sys;
  sys.op = std::make_shared<KktOperator>(problem.hessian_ptr(), problem.constraints_ptr(),
                                         layout.lin_lower, layout.lin_upper);
  sys.op->update_diagonals(d.q_extra, d.d_lower, d.d_upper);
  sys.b = rng.normal_vector(sys.op->dim());
  const Vector diag = sys.op->jacobi_diagonal();
  const auto [lo, hi] = std::minmax_element(diag.begin(), diag.end());
  sys.diagonal_spread = *hi / *lo;
  return sys;
}

}  // namespace ipqp::fixtures

#include "ipqp/ipm.hpp"

namespace ipqp::fixtures {

/// Stacks a direction in the unknown order of the dense Newton oracle.
inline Eigen::VectorXd flatten(const StepDirection& d) {
  Vector v(d.dx);
  for (const auto* f : d.dmult.all()) v.insert(v.end(), f->begin(), f->end());
  for (const auto* f : d.dslack.all()) v.insert(v.end(), f->begin(), f->end());
  return eig(v);
}

inline std::shared_ptr<const CsrMatrix> no_rows(Index n) {
  return std::make_shared<CsrMatrix>(0, n, std::vector<Index>{0}, std::vector<Index>{}, Vector{});
}

/// min 1/2 h x^2 + p x  s.t.  a <= x <= b
inline QpProblem scalar_qp(double h, double p, double a, double b) {
  return QpProblem(std::make_shared<DiagonalOperator>(Vector{h}), Vector{p}, no_rows(1), {}, {},
                   Vector{a}, Vector{b});
}

}  // namespace ipqp::fixtures

namespace ipqp::fixtures {

/// Stacks residuals in the row order of the dense Newton oracle.
inline Eigen::VectorXd flatten(const ResidualSet& r) {
  Vector v(r.dual);
  for (const auto* f : r.primal.all()) v.insert(v.end(), f->begin(), f->end());
  for (const auto* f : r.comp.all()) v.insert(v.end(), f->begin(), f->end());
  return eig(v);
}

}  // namespace ipqp::fixtures
