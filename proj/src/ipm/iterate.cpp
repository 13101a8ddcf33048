#include <algorithm>
#include <cmath>

#include "ipqp/iterate.hpp"
#include "ipqp/vec.hpp"

namespace ipqp {

PerFamily<Vector> family_vectors(const BoundLayout& layout, double value) {
  PerFamily<Vector> f;
  f.lin_lower.assign(layout.lin_lower.size(), value);
  f.lin_upper.assign(layout.lin_upper.size(), value);
  f.var_lower.assign(layout.var_lower.size(), value);
  f.var_upper.assign(layout.var_upper.size(), value);
  return f;
}

double IterateState::min_interior() const {
  double m = kInf;
  for (const auto* fam : slack.all()) {
    for (double v : *fam) m = std::min(m, v);
  }
  for (const auto* fam : mult.all()) {
    for (double v : *fam) m = std::min(m, v);
  }
  return m;
}

namespace {

double family_inf(const PerFamily<Vector>& f) {
  double m = 0.0;
  for (const auto* fam : f.all()) m = std::max(m, vec::norm_inf(*fam));
  return m;
}

}  // namespace

double ResidualSet::dual_inf() const { return vec::norm_inf(dual); }
double ResidualSet::primal_inf() const { return family_inf(primal); }
double ResidualSet::comp_inf() const { return family_inf(comp); }
double ResidualSet::norm_inf() const {
  return std::max({dual_inf(), primal_inf(), comp_inf()});
}

double ResidualSet::norm2() const {
  double sq = vec::dot(dual, dual);
  for (const auto* fam : primal.all()) sq += vec::dot(*fam, *fam);
  for (const auto* fam : comp.all()) sq += vec::dot(*fam, *fam);
  return std::sqrt(sq);
}

bool ResidualSet::finite() const {
  if (!vec::all_finite(dual)) return false;
  for (const auto* fam : primal.all()) {
    if (!vec::all_finite(*fam)) return false;
  }
  for (const auto* fam : comp.all()) {
    if (!vec::all_finite(*fam)) return false;
  }
  return true;
}

}  // namespace ipqp
