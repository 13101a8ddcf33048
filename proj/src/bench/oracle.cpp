#include "ipqp/bench/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ipqp::bench {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd dense_matrix(const SymmetricOperator& op) {
  const Index n = op.dim();
  MatrixXd h = MatrixXd::Zero(n, n);
  if (const auto* d = dynamic_cast<const DiagonalOperator*>(&op)) {
    for (Index i = 0; i < n; ++i) h(i, i) = d->entries()[i];
  } else if (const auto* s = dynamic_cast<const DenseSymmetricOperator*>(&op)) {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) h(i, j) = s->data()[i * n + j];
  } else if (const auto* c = dynamic_cast<const CsrSymmetricOperator*>(&op)) {
    h = dense_matrix(c->matrix());
  } else if (const auto* b = dynamic_cast<const BfgsOperator*>(&op)) {
    for (Index i = 0; i < n; ++i) h(i, i) = b->h0()[i];
    for (Index k = 0; k < b->column_count(); ++k) {
      const auto col = b->column(k);
      const VectorXd u = Eigen::Map<const VectorXd>(col.data(), n);
      h += b->weights()[k] * u * u.transpose();
    }
  } else {
    Vector e(n, 0.0);
    for (Index j = 0; j < n; ++j) {
      e[j] = 1.0;
      const Vector col = op.apply(e);
      for (Index i = 0; i < n; ++i) h(i, j) = col[i];
      e[j] = 0.0;
    }
  }
  return h;
}

MatrixXd dense_matrix(const CsrMatrix& a) {
  MatrixXd out = MatrixXd::Zero(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
      out(i, a.col_indices()[k]) = a.values()[k];
    }
  }
  return out;
}

MatrixXd dense_b(const CsrMatrix& a, std::span<const Index> lower_rows,
                 std::span<const Index> upper_rows) {
  const MatrixXd ad = dense_matrix(a);
  MatrixXd b(lower_rows.size() + upper_rows.size(), a.cols());
  for (Index r = 0; r < lower_rows.size(); ++r) b.row(r) = ad.row(lower_rows[r]);
  for (Index r = 0; r < upper_rows.size(); ++r) {
    b.row(lower_rows.size() + r) = -ad.row(upper_rows[r]);
  }
  return b;
}

namespace {

VectorXd to_eigen(std::span<const double> v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

VectorXd concat(std::span<const double> a, std::span<const double> b) {
  VectorXd out(a.size() + b.size());
  out << to_eigen(a), to_eigen(b);
  return out;
}

}  // namespace

MatrixXd assemble_reduced(const SymmetricOperator& h, const CsrMatrix& a,
                          std::span<const Index> lower_rows, std::span<const Index> upper_rows,
                          std::span<const double> q_extra, std::span<const double> d_lower,
                          std::span<const double> d_upper) {
  const Index n = h.dim();
  const MatrixXd b = dense_b(a, lower_rows, upper_rows);
  const Index mb = b.rows();
  MatrixXd k = MatrixXd::Zero(n + mb, n + mb);
  k.topLeftCorner(n, n) = dense_matrix(h);
  k.topLeftCorner(n, n).diagonal() += to_eigen(q_extra);
  k.topRightCorner(n, mb) = -b.transpose();
  k.bottomLeftCorner(mb, n) = b;
  k.bottomRightCorner(mb, mb) = concat(d_lower, d_upper).asDiagonal();
  return k;
}

MatrixXd assemble_doubly_augmented(const SymmetricOperator& h, const CsrMatrix& a,
                                   std::span<const Index> lower_rows,
                                   std::span<const Index> upper_rows,
                                   std::span<const double> q_extra,
                                   std::span<const double> d_lower,
                                   std::span<const double> d_upper) {
  const Index n = h.dim();
  const MatrixXd b = dense_b(a, lower_rows, upper_rows);
  const Index mb = b.rows();
  const VectorXd d = concat(d_lower, d_upper);
  const VectorXd d_inv = d.cwiseInverse();
  MatrixXd k = MatrixXd::Zero(n + mb, n + mb);
  k.topLeftCorner(n, n) = dense_matrix(h);
  k.topLeftCorner(n, n).diagonal() += to_eigen(q_extra);
  k.topLeftCorner(n, n) += 2.0 * b.transpose() * d_inv.asDiagonal() * b;
  k.topRightCorner(n, mb) = b.transpose();
  k.bottomLeftCorner(mb, n) = b;
  k.bottomRightCorner(mb, mb) = d.asDiagonal();
  return k;
}

NewtonSystem assemble_newton(const QpProblem& problem, const IterateState& it) {
  const BoundLayout layout = BoundLayout::of(problem);
  const Index n = problem.n();
  const MatrixXd h = dense_matrix(problem.hessian());
  const MatrixXd a = dense_matrix(problem.constraints());
  const auto& L = layout.lin_lower;
  const auto& U = layout.lin_upper;
  const auto& Lx = layout.var_lower;
  const auto& Ux = layout.var_upper;
  const Index nl = L.size(), nu = U.size(), nlx = Lx.size(), nux = Ux.size();
  const Index mt = layout.total();

  // Family blocks as explicit rows: c_k^T dx enters each primal residual.
  MatrixXd c = MatrixXd::Zero(mt, n);
  for (Index r = 0; r < nl; ++r) c.row(r) = a.row(L[r]);
  for (Index r = 0; r < nu; ++r) c.row(nl + r) = -a.row(U[r]);
  for (Index r = 0; r < nlx; ++r) c(nl + nu + r, Lx[r]) = 1.0;
  for (Index r = 0; r < nux; ++r) c(nl + nu + nlx + r, Ux[r]) = -1.0;

  VectorXd lam(mt), s(mt), e(mt);
  const VectorXd x = to_eigen(it.x);
  for (Index r = 0; r < nl; ++r) {
    lam(r) = it.mult.lin_lower[r];
    s(r) = it.slack.lin_lower[r];
  }
  for (Index r = 0; r < nu; ++r) {
    lam(nl + r) = it.mult.lin_upper[r];
    s(nl + r) = it.slack.lin_upper[r];
  }
  for (Index r = 0; r < nlx; ++r) {
    lam(nl + nu + r) = it.mult.var_lower[r];
    s(nl + nu + r) = it.slack.var_lower[r];
  }
  for (Index r = 0; r < nux; ++r) {
    lam(nl + nu + nlx + r) = it.mult.var_upper[r];
    s(nl + nu + nlx + r) = it.slack.var_upper[r];
  }
  // Each constraint reads c_k^T x - s_k = e_k.
  for (Index r = 0; r < nl; ++r) e(r) = problem.lin_lower()[L[r]];
  for (Index r = 0; r < nu; ++r) e(nl + r) = -problem.lin_upper()[U[r]];
  for (Index r = 0; r < nlx; ++r) e(nl + nu + r) = problem.var_lower()[Lx[r]];
  for (Index r = 0; r < nux; ++r) e(nl + nu + nlx + r) = -problem.var_upper()[Ux[r]];

  const VectorXd r_dual = h * x + to_eigen(problem.linear_term()) - c.transpose() * lam;
  const VectorXd r_primal = c * x - s - e;
  const VectorXd r_comp = lam.cwiseProduct(s) - VectorXd::Constant(mt, it.mu);

  const Index dim = n + 2 * mt;
  NewtonSystem sys;
  sys.matrix = MatrixXd::Zero(dim, dim);
  sys.rhs = VectorXd::Zero(dim);
  sys.matrix.block(0, 0, n, n) = h;
  sys.matrix.block(0, n, n, mt) = -c.transpose();
  sys.matrix.block(n, 0, mt, n) = c;
  sys.matrix.block(n, n + mt, mt, mt) = -MatrixXd::Identity(mt, mt);
  sys.matrix.block(n + mt, n, mt, mt) = s.asDiagonal();
  sys.matrix.block(n + mt, n + mt, mt, mt) = lam.asDiagonal();
  sys.rhs.segment(0, n) = -r_dual;
  sys.rhs.segment(n, mt) = -r_primal;
  sys.rhs.segment(n + mt, mt) = -r_comp;
  return sys;
}

StepDirection dense_newton_step(const QpProblem& problem, const IterateState& it) {
  const BoundLayout layout = BoundLayout::of(problem);
  const Index n = problem.n();
  const Index mt = layout.total();
  require(n + mt <= 500, "dense_newton_step: n + bound rows exceeds 500");
  const NewtonSystem sys = assemble_newton(problem, it);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.matrix);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-300) || !std::isfinite(rcond)) {
    throw OracleError("dense_newton_step: singular Newton matrix (rcond " +
                      std::to_string(rcond) + ")");
  }
  const VectorXd sol = lu.solve(sys.rhs);
  if (!sol.allFinite()) throw OracleError("dense_newton_step: non-finite solution");
  StepDirection dir;
  dir.dx.assign(sol.data(), sol.data() + n);
  const double* lam = sol.data() + n;
  const double* ds = sol.data() + n + mt;
  auto take = [](const double*& p, Index count) {
    Vector v(p, p + count);
    p += count;
    return v;
  };
  dir.dmult.lin_lower = take(lam, layout.lin_lower.size());
  dir.dmult.lin_upper = take(lam, layout.lin_upper.size());
  dir.dmult.var_lower = take(lam, layout.var_lower.size());
  dir.dmult.var_upper = take(lam, layout.var_upper.size());
  dir.dslack.lin_lower = take(ds, layout.lin_lower.size());
  dir.dslack.lin_upper = take(ds, layout.lin_upper.size());
  dir.dslack.var_lower = take(ds, layout.var_lower.size());
  dir.dslack.var_upper = take(ds, layout.var_upper.size());
  return dir;
}

namespace {

// Every finite bound as c^T x >= e, tagged with its family slot.
struct Inequalities {
  MatrixXd c;  // one row per constraint
  VectorXd e;
  std::vector<int> family;
  std::vector<Index> slot;
  BoundLayout layout;
};

Inequalities inequalities_of(const QpProblem& problem) {
  Inequalities q;
  q.layout = BoundLayout::of(problem);
  const auto& lay = q.layout;
  const Index n = problem.n();
  const MatrixXd a = dense_matrix(problem.constraints());
  const Index mt = lay.total();
  q.c = MatrixXd::Zero(mt, n);
  q.e.resize(mt);
  Index k = 0;
  auto push = [&](int fam, Index slot, double e) {
    q.family.push_back(fam);
    q.slot.push_back(slot);
    q.e(k) = e;
    ++k;
  };
  for (Index r = 0; r < lay.lin_lower.size(); ++r) {
    q.c.row(k) = a.row(lay.lin_lower[r]);
    push(0, r, problem.lin_lower()[lay.lin_lower[r]]);
  }
  for (Index r = 0; r < lay.lin_upper.size(); ++r) {
    q.c.row(k) = -a.row(lay.lin_upper[r]);
    push(1, r, -problem.lin_upper()[lay.lin_upper[r]]);
  }
  for (Index r = 0; r < lay.var_lower.size(); ++r) {
    q.c(k, lay.var_lower[r]) = 1.0;
    push(2, r, problem.var_lower()[lay.var_lower[r]]);
  }
  for (Index r = 0; r < lay.var_upper.size(); ++r) {
    q.c(k, lay.var_upper[r]) = -1.0;
    push(3, r, -problem.var_upper()[lay.var_upper[r]]);
  }
  return q;
}

double error_scale(const QpProblem& problem) {
  double scale = 1.0;
  for (double v : problem.linear_term()) scale = std::max(scale, std::abs(v));
  for (auto span : {problem.lin_lower(), problem.lin_upper(), problem.var_lower(),
                    problem.var_upper()}) {
    for (double v : span) {
      if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
    }
  }
  return scale;
}

// Solves G x + p - N u = 0, N^T x = e_W for the working set.
bool solve_equality(const MatrixXd& g, const VectorXd& p, const Inequalities& q,
                    const std::vector<Index>& work, VectorXd& x, VectorXd& u) {
  const Index n = g.rows();
  const Index w = work.size();
  MatrixXd k = MatrixXd::Zero(n + w, n + w);
  VectorXd rhs(n + w);
  k.topLeftCorner(n, n) = g;
  rhs.head(n) = -p;
  for (Index j = 0; j < w; ++j) {
    k.block(0, n + j, n, 1) = -q.c.row(work[j]).transpose();
    k.block(n + j, 0, 1, n) = q.c.row(work[j]);
    rhs(n + j) = q.e(work[j]);
  }
  Eigen::FullPivLU<MatrixXd> lu(k);
  if (!lu.isInvertible()) return false;
  const VectorXd sol = lu.solve(rhs);
  x = sol.head(n);
  u = sol.tail(w);
  return true;
}

QpReference finish(const MatrixXd& g, const VectorXd& p,
                   const Inequalities& q, const std::vector<Index>& work, const VectorXd& x,
                   const VectorXd& u) {
  QpReference ref;
  ref.x.assign(x.data(), x.data() + x.size());
  ref.objective = 0.5 * x.dot(g * x) + p.dot(x);
  ref.active = work.size();
  ref.mult = family_vectors(q.layout, 0.0);
  VectorXd full = VectorXd::Zero(q.e.size());
  for (Index j = 0; j < work.size(); ++j) full(work[j]) = u(j);
  for (Index k = 0; k < static_cast<Index>(full.size()); ++k) {
    ref.mult.all()[q.family[k]]->at(q.slot[k]) = full(k);
  }
  const VectorXd slack = q.c * x - q.e;
  double err = (g * x + p - q.c.transpose() * full).lpNorm<Eigen::Infinity>();
  for (Index k = 0; k < static_cast<Index>(full.size()); ++k) {
    err = std::max({err, -slack(k), -full(k), std::abs(full(k) * slack(k))});
  }
  ref.kkt_error = err;
  return ref;
}

MatrixXd checked_hessian(const QpProblem& problem) {
  MatrixXd g = dense_matrix(problem.hessian());
  Eigen::LLT<MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) {
    throw OracleError("oracle: Hessian is not positive definite");
  }
  return g;
}

}  // namespace

QpReference active_set_oracle(const QpProblem& problem, double tolerance) {
  const MatrixXd g = checked_hessian(problem);
  const VectorXd p = to_eigen(problem.linear_term());
  const Inequalities q = inequalities_of(problem);
  const Index n = problem.n();
  const Index mt = q.e.size();
  const double scale = error_scale(problem);
  const double feas_tol = 1e-12 * scale;

  const Eigen::LLT<MatrixXd> llt(g);
  VectorXd x = llt.solve(-p);
  std::vector<Index> work;
  std::vector<double> u;
  std::vector<char> in_work(mt, 0);
  int iterations = 0;
  const int max_iterations = 50 * static_cast<int>(n + mt) + 100;

  while (true) {
    // Most violated constraint outside the working set.
    Index add = mt;
    double worst = -feas_tol;
    for (Index k = 0; k < mt; ++k) {
      if (in_work[k]) continue;
      const double s = q.c.row(k).dot(x) - q.e(k);
      if (s < worst) {
        worst = s;
        add = k;
      }
    }
    if (add == mt) break;

    double u_add = 0.0;
    while (true) {
      if (++iterations > max_iterations) throw OracleError("oracle: iteration limit");
      const VectorXd np = q.c.row(add).transpose();
      const Index w = work.size();
      VectorXd z, r(w);
      {
        MatrixXd k = MatrixXd::Zero(n + w, n + w);
        VectorXd rhs = VectorXd::Zero(n + w);
        k.topLeftCorner(n, n) = g;
        rhs.head(n) = np;
        for (Index j = 0; j < w; ++j) {
          k.block(0, n + j, n, 1) = q.c.row(work[j]).transpose();
          k.block(n + j, 0, 1, n) = q.c.row(work[j]);
        }
        const VectorXd sol = k.fullPivLu().solve(rhs);
        z = sol.head(n);
        r = sol.tail(w);
      }
      // Partial step: largest t keeping the working multipliers nonnegative.
      double t1 = std::numeric_limits<double>::infinity();
      Index drop = w;
      for (Index j = 0; j < w; ++j) {
        if (r(j) > 1e-14 && u[j] / r(j) < t1) {
          t1 = u[j] / r(j);
          drop = j;
        }
      }
      double t2 = std::numeric_limits<double>::infinity();
      const double znp = z.dot(np);
      if (z.lpNorm<Eigen::Infinity>() > 1e-14 && znp > 0.0) {
        t2 = -(np.dot(x) - q.e(add)) / znp;
      }
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) throw OracleError("oracle: QP is infeasible");
      x += t * z;
      for (Index j = 0; j < w; ++j) u[j] -= t * r(j);
      u_add += t;
      if (t2 <= t1) {
        work.push_back(add);
        u.push_back(u_add);
        in_work[add] = 1;
        break;
      }
      in_work[work[drop]] = 0;
      work.erase(work.begin() + static_cast<std::ptrdiff_t>(drop));
      u.erase(u.begin() + static_cast<std::ptrdiff_t>(drop));
    }
  }

  VectorXd xr = x, ur = Eigen::Map<const VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
  if (!solve_equality(g, p, q, work, xr, ur)) {
    xr = x;
    ur = Eigen::Map<const VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
  }
  QpReference ref = finish(g, p, q, work, xr, ur);
  ref.iterations = iterations;
  if (ref.kkt_error > tolerance * scale) {
    throw OracleError("oracle: KKT error " + std::to_string(ref.kkt_error) +
                      " above tolerance");
  }
  return ref;
}

QpReference enumerate_oracle(const QpProblem& problem, double tolerance,
                             std::size_t max_candidates) {
  const MatrixXd g = checked_hessian(problem);
  const VectorXd p = to_eigen(problem.linear_term());
  const Inequalities q = inequalities_of(problem);
  const double scale = error_scale(problem);
  const Index mt = q.e.size();
  if (mt >= 63 || (std::size_t{1} << mt) > max_candidates) {
    throw OracleError("oracle: too many candidate active sets");
  }
  const std::uint64_t count = std::uint64_t{1} << mt;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    std::vector<Index> work;
    for (Index k = 0; k < mt; ++k) {
      if (mask & (std::uint64_t{1} << k)) work.push_back(k);
    }
    VectorXd x, u;
    if (!solve_equality(g, p, q, work, x, u)) continue;
    QpReference ref = finish(g, p, q, work, x, u);
    if (ref.kkt_error <= tolerance * scale) return ref;
  }
  throw OracleError("oracle: no active set satisfies the KKT conditions");
}

}  // namespace ipqp::bench
