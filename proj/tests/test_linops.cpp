#include <gtest/gtest.h>

#include <thread>

#include "ipqp/bench/oracle.hpp"
#include "support.hpp"

using namespace ipqp;
using ipqp::bench::Rng;
using ipqp::fixtures::eig;
using ipqp::fixtures::rel_err;

namespace {

CsrMatrix two_by_two() { return CsrMatrix(2, 2, {0, 2, 3}, {0, 1, 1}, {1.0, 2.0, 3.0}); }

}  // namespace

TEST(Csr, IdentityApply) {
  const CsrMatrix id(2, 2, {0, 1, 2}, {0, 1}, {1.0, 1.0});
  EXPECT_EQ(id.apply(Vector{3, 4}), (Vector{3, 4}));
  EXPECT_EQ(id.apply_transpose(Vector{5, 6}), (Vector{5, 6}));
}

TEST(Csr, HandArithmetic) {
  const CsrMatrix a = two_by_two();
  EXPECT_EQ(a.apply(Vector{1, 1}), (Vector{3, 3}));
  EXPECT_EQ(a.apply_transpose(Vector{1, 1}), (Vector{1, 5}));
}

TEST(Csr, SeededMatchesDense) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const CsrMatrix a = fixtures::random_csr(rng, 50, 30, 0.2);
    const Eigen::MatrixXd d = bench::dense_matrix(a);
    const Vector x = rng.normal_vector(30);
    const Vector y = rng.normal_vector(50);
    EXPECT_LE(rel_err(a.apply(x), d * eig(x)), 1e-14);
    EXPECT_LE(rel_err(a.apply_transpose(y), d.transpose() * eig(y)), 1e-14);
  }
}

TEST(Csr, TransposeIsBitExact) {
  Rng rng(3);
  const CsrMatrix a = fixtures::random_csr(rng, 17, 23, 0.3);
  const auto to = a.transpose_offsets();
  const auto ti = a.transpose_indices();
  const auto tv = a.transpose_values();
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
      const Index j = a.col_indices()[k];
      const auto begin = ti.begin() + static_cast<long>(to[j]);
      const auto end = ti.begin() + static_cast<long>(to[j + 1]);
      const auto it = std::find(begin, end, i);
      ASSERT_NE(it, end);
      EXPECT_EQ(tv[static_cast<Index>(it - ti.begin())], a.values()[k]);
    }
  }
}

TEST(Csr, RejectsMalformed) {
  EXPECT_THROW(CsrMatrix(2, 2, {0, 2, 1}, {0, 1}, {1, 1}), ContractError);
  EXPECT_THROW(CsrMatrix(1, 2, {0, 2}, {1, 1}, {1, 1}), ContractError);  // duplicate
  EXPECT_THROW(CsrMatrix(1, 2, {0, 2}, {1, 0}, {1, 1}), ContractError);  // unsorted
  EXPECT_THROW(CsrMatrix(1, 2, {0, 1}, {2}, {1}), ContractError);        // out of range
  EXPECT_THROW(CsrMatrix(1, 2, {1, 1}, {}, {}), ContractError);          // offsets[0] != 0
  EXPECT_THROW(CsrMatrix(1, 1, {0, 1}, {0}, {std::nan("")}), ContractError);
}

TEST(Csr, DimensionMismatch) {
  const CsrMatrix a = two_by_two();
  EXPECT_THROW(a.apply(Vector{1, 2, 3}), ContractError);
  EXPECT_THROW(a.apply_transpose(Vector{1}), ContractError);
}

TEST(Csr, FromDenseDropsZeros) {
  const CsrMatrix a = CsrMatrix::from_dense(2, 2, Vector{1, 0, 0, 3});
  EXPECT_EQ(a.nnz(), 2u);
  EXPECT_EQ(a.apply(Vector{1, 1}), (Vector{1, 3}));
}

TEST(Csr, WeightedColumnSquares) {
  const CsrMatrix a = two_by_two();
  Vector out(2);
  a.weighted_column_squares(Vector{1.0, 2.0}, out);
  EXPECT_EQ(out, (Vector{1.0, 4.0 + 2.0 * 9.0}));
}

TEST(Bfgs, NoPairsIsH0) {
  const BfgsOperator h(Vector{2, 3});
  EXPECT_EQ(h.apply(Vector{1, 1}), (Vector{2, 3}));
  EXPECT_EQ(h.diagonal(), (Vector{2, 3}));
  EXPECT_EQ(h.pair_count(), 0u);
}

TEST(Bfgs, RankOneHandArithmetic) {
  const BfgsOperator h(Vector{1, 1}, Vector{1, 0}, Vector{2});
  EXPECT_EQ(h.apply(Vector{1, 1}), (Vector{3, 1}));
  EXPECT_EQ(h.diagonal(), (Vector{3, 1}));
}

TEST(Bfgs, SeededMatchesDense) {
  for (const auto& [n, k] : {std::pair<Index, Index>{40, 5}, {200, 20}, {7, 1}}) {
    Rng rng(n + k);
    const auto h = fixtures::random_bfgs(rng, n, k);
    Eigen::MatrixXd dense = Eigen::VectorXd(eig(h->h0())).asDiagonal();
    for (Index c = 0; c < h->column_count(); ++c) {
      dense += h->weights()[c] * eig(h->column(c)) * eig(h->column(c)).transpose();
    }
    const Vector x = rng.normal_vector(n);
    EXPECT_LE(rel_err(h->apply(x), dense * eig(x)), 1e-12);
    EXPECT_LE(rel_err(h->diagonal(), dense.diagonal()), 1e-13);
  }
}

TEST(Bfgs, RejectsBadData) {
  EXPECT_THROW(BfgsOperator(Vector{0.0, 1.0}), ContractError);
  EXPECT_THROW(BfgsOperator(Vector{1.0}, Vector{1.0}, Vector{0.0}), ContractError);
  EXPECT_THROW(BfgsOperator(Vector{1.0, 1.0}, Vector{1.0}, Vector{1.0}), ContractError);
}

TEST(Bfgs, WithPairAppendsTwoColumns) {
  const auto h = std::make_shared<BfgsOperator>(Vector{1, 1, 1});
  const auto h2 = h->with_pair(Vector{1, 0, 0}, -0.5, Vector{0, 1, 0}, 2.0);
  EXPECT_EQ(h2->pair_count(), 1u);
  EXPECT_EQ(h2->column_count(), 2u);
  EXPECT_EQ(h2->apply(Vector{1, 1, 1}), (Vector{0.5, 3, 1}));
  EXPECT_EQ(h->pair_count(), 0u);
}

TEST(Dense, RejectsAsymmetric) {
  EXPECT_THROW(DenseSymmetricOperator(2, Vector{1, 2, 3, 4}), ContractError);
  const DenseSymmetricOperator d(2, Vector{2, 1, 1, 3});
  EXPECT_EQ(d.apply(Vector{1, 1}), (Vector{3, 4}));
}

TEST(CsrSymmetric, RejectsAsymmetric) {
  EXPECT_THROW(CsrSymmetricOperator(CsrMatrix(2, 2, {0, 2, 3}, {0, 1, 1}, {1, 2, 3})),
               ContractError);
}

// For every concrete operator: diagonal()[j] = e_j^T op(e_j), symmetry and
// linearity.
class OperatorProperties : public ::testing::TestWithParam<int> {};

TEST_P(OperatorProperties, DiagonalSymmetryLinearity) {
  const int kind = GetParam();
  Rng rng(100 + static_cast<std::uint64_t>(kind));
  const Index n = 60;
  std::shared_ptr<const SymmetricOperator> op;
  switch (kind) {
    case 0: {
      Vector d(n);
      for (auto& v : d) v = rng.uniform(0.1, 3.0);
      op = std::make_shared<DiagonalOperator>(d);
      break;
    }
    case 1: {
      Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return rng.normal(); });
      Eigen::MatrixXd s = m + m.transpose();
      Vector data(n * n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) data[i * n + j] = s(i, j);
      op = std::make_shared<DenseSymmetricOperator>(n, data);
      break;
    }
    case 2: {
      bench::GeneratorSpec spec;
      spec.n = n;
      spec.hessian = bench::HessianKind::kCsr;
      op = bench::generate(spec).hessian_ptr();
      break;
    }
    default:
      op = fixtures::random_bfgs(rng, n, 6);
  }
  const Vector diag = op->diagonal();
  ASSERT_EQ(diag.size(), n);
  Vector e(n, 0.0);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    const double ejj = op->apply(e)[j];
    EXPECT_LE(std::abs(diag[j] - ejj), 1e-13 * std::max(1.0, std::abs(ejj)));
    e[j] = 0.0;
  }
  const Vector x = rng.normal_vector(n), y = rng.normal_vector(n);
  const double xay = eig(x).dot(eig(op->apply(y)));
  const double yax = eig(y).dot(eig(op->apply(x)));
  EXPECT_LE(std::abs(xay - yax), 1e-12 * std::max(1.0, std::abs(xay)));

  Vector comb(n);
  for (Index i = 0; i < n; ++i) comb[i] = 2.0 * x[i] - 3.0 * y[i];
  const Eigen::VectorXd lhs = eig(op->apply(comb));
  const Eigen::VectorXd rhs = 2.0 * eig(op->apply(x)) - 3.0 * eig(op->apply(y));
  EXPECT_LE(rel_err(lhs, rhs), 1e-12);

  EXPECT_EQ(op->apply(x), op->apply(x));
}

INSTANTIATE_TEST_SUITE_P(AllOperators, OperatorProperties, ::testing::Values(0, 1, 2, 3));

TEST(Bfgs, ConcurrentApplyAndDiagonal) {
  Rng rng(9);
  const auto h = fixtures::random_bfgs(rng, 300, 10);
  const Vector x = rng.normal_vector(300);
  const Vector expected = h->apply(x);
  std::vector<Vector> diag(4);
  std::vector<int> ok(4, 0);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&, t] {
      Vector y(300), scratch(h->scratch_size());
      bool same = true;
      for (int r = 0; r < 20; ++r) {
        h->apply(x, y, scratch);
        same = same && y == expected;
      }
      diag[static_cast<Index>(t)] = h->diagonal();
      ok[static_cast<Index>(t)] = same;
    });
  }
  for (auto& th : pool) th.join();
  for (int t = 0; t < 4; ++t) {
    EXPECT_TRUE(ok[static_cast<Index>(t)]);
    EXPECT_EQ(diag[static_cast<Index>(t)], diag[0]);
  }
}
