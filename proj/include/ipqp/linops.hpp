#pragma once

// Linear operator layer. Every matrix the solver touches is reached through
// apply / diagonal contracts; nothing outside test oracles assembles a dense
// Hessian or KKT matrix.

#include <memory>
#include <mutex>
#include <span>

#include "ipqp/types.hpp"

namespace ipqp {

/// Symmetric n x n operator.
///
/// Derived classes implement do_apply() against caller-provided scratch of
/// scratch_size() entries. The two-argument apply() borrows the operator's own
/// preallocated scratch; concurrent callers of that overload are serialized,
/// callers that want real parallelism pass their own scratch.
class SymmetricOperator {
 public:
  virtual ~SymmetricOperator() = default;
  SymmetricOperator(const SymmetricOperator&) = delete;
  SymmetricOperator& operator=(const SymmetricOperator&) = delete;

  Index dim() const noexcept { return dim_; }
  Index scratch_size() const noexcept { return owned_scratch_.size(); }

  void apply(std::span<const double> x, std::span<double> y,
             std::span<double> scratch) const;
  void apply(std::span<const double> x, std::span<double> y) const;
  Vector apply(std::span<const double> x) const;

  /// Entry j equals e_j^T op(e_j).
  virtual Vector diagonal() const = 0;

 protected:
  SymmetricOperator(Index dim, Index scratch_size);

  virtual void do_apply(std::span<const double> x, std::span<double> y,
                        std::span<double> scratch) const = 0;

 private:
  Index dim_;
  mutable std::mutex scratch_mutex_;
  mutable Vector owned_scratch_;
};

/// Compressed sparse row matrix with an explicit transpose built once at
/// construction. Columns are strictly increasing within each row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// An empty rows x cols matrix.
  CsrMatrix(Index rows, Index cols);
  CsrMatrix(Index rows, Index cols, std::vector<Index> row_offsets,
            std::vector<Index> col_indices, Vector values);

  /// Builds from a row-major dense array, keeping entries that are not +0/-0.
  static CsrMatrix from_dense(Index rows, Index cols, std::span<const double> dense);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return values_.size(); }

  std::span<const Index> row_offsets() const noexcept { return row_offsets_; }
  std::span<const Index> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<const Index> transpose_offsets() const noexcept { return t_offsets_; }
  std::span<const Index> transpose_indices() const noexcept { return t_indices_; }
  std::span<const double> transpose_values() const noexcept { return t_values_; }

  /// y = A x
  void apply(std::span<const double> x, std::span<double> y) const;
  Vector apply(std::span<const double> x) const;

  /// x = A^T y, computed row-wise over the stored transpose.
  void apply_transpose(std::span<const double> y, std::span<double> x) const;
  Vector apply_transpose(std::span<const double> y) const;

  /// out[j] = sum_i w[i] * A(i, j)^2
  void weighted_column_squares(std::span<const double> w, std::span<double> out) const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  void build_transpose();

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  Vector values_;

  std::vector<Index> t_offsets_{0};
  std::vector<Index> t_indices_;
  Vector t_values_;
};

class DiagonalOperator final : public SymmetricOperator {
 public:
  explicit DiagonalOperator(Vector entries);

  std::span<const double> entries() const noexcept { return entries_; }
  Vector diagonal() const override { return entries_; }

 protected:
  void do_apply(std::span<const double> x, std::span<double> y,
                std::span<double> scratch) const override;

 private:
  Vector entries_;
};

/// Dense symmetric matrix, row-major. Symmetry is checked exactly.
class DenseSymmetricOperator final : public SymmetricOperator {
 public:
  DenseSymmetricOperator(Index n, Vector row_major);

  std::span<const double> data() const noexcept { return data_; }
  Vector diagonal() const override;

 protected:
  void do_apply(std::span<const double> x, std::span<double> y,
                std::span<double> scratch) const override;

 private:
  Vector data_;
};

/// Square CSR matrix used as a Hessian. The matrix must equal its stored
/// transpose entry for entry.
class CsrSymmetricOperator final : public SymmetricOperator {
 public:
  explicit CsrSymmetricOperator(CsrMatrix matrix);

  const CsrMatrix& matrix() const noexcept { return matrix_; }
  Vector diagonal() const override;

 protected:
  void do_apply(std::span<const double> x, std::span<double> y,
                std::span<double> scratch) const override;

 private:
  CsrMatrix matrix_;
};

/// Compact quasi-Newton Hessian H = H0 + U diag(W) U^T with diagonal H0.
///
/// U is stored column-major with two columns per accepted update, so after k
/// updates it is n x 2k. The diagonal is computed once on first request.
class BfgsOperator final : public SymmetricOperator {
 public:
  /// `columns` holds weights.size() columns of length n, back to back.
  /// Updates append columns in pairs; pair_count() is column_count() / 2.
  BfgsOperator(Vector h0_diag, Vector columns, Vector weights);
  explicit BfgsOperator(Vector h0_diag);

  Index pair_count() const noexcept { return weights_.size() / 2; }
  Index column_count() const noexcept { return weights_.size(); }
  std::span<const double> h0() const noexcept { return h0_; }
  std::span<const double> column(Index k) const;
  std::span<const double> columns() const noexcept { return columns_; }
  std::span<const double> weights() const noexcept { return weights_; }

  Vector diagonal() const override;

  /// A new operator with two more columns appended.
  std::shared_ptr<const BfgsOperator> with_pair(std::span<const double> u1, double w1,
                                                std::span<const double> u2,
                                                double w2) const;

 protected:
  void do_apply(std::span<const double> x, std::span<double> y,
                std::span<double> scratch) const override;

 private:
  Vector h0_;
  Vector columns_;
  Vector weights_;

  mutable std::once_flag diagonal_once_;
  mutable Vector diagonal_;
};

}  // namespace ipqp
