#pragma once

#include "dispersim/types.hpp"

#include <Eigen/Core>

#include <memory>
#include <span>
#include <vector>

namespace dispersim {

struct Triplet {
  Index row;
  Index col;
  double value;
};

using Triplets = std::vector<Triplet>;

/// Compressed sparse row matrix. Columns are strictly increasing within each
/// row and no (row, col) pair is stored twice.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(Index rows, Index cols, std::vector<Index> offsets, std::vector<Index> columns,
            std::vector<double> values);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }

  const std::vector<Index>& offsets() const { return offsets_; }
  const std::vector<Index>& columns() const { return columns_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Stored entry or 0.
  double coeff(Index r, Index c) const;
  /// Position of (r, c) in values(), or -1 when not stored.
  std::ptrdiff_t find(Index r, Index c) const;

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd to_dense() const;

  bool same_pattern(const CsrMatrix& other) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> offsets_{0};
  std::vector<Index> columns_;
  std::vector<double> values_;
};

/// Sums duplicates. The result does not depend on the order of the input:
/// entries are sorted by (row, col, value) before summation.
CsrMatrix to_csr(std::span<const Triplet> triplets, Index rows, Index cols);

/// Sparse LU with partial pivoting. factorize() reuses the symbolic analysis
/// when called again with a matrix of identical sparsity pattern.
class LuSolver {
 public:
  LuSolver();
  ~LuSolver();
  LuSolver(LuSolver&&) noexcept;
  LuSolver& operator=(LuSolver&&) noexcept;

  /// Relative pivot threshold: a factorization whose smallest |U_jj| is below
  /// threshold * max |A_ij| is reported singular.
  void set_pivot_threshold(double threshold) { pivot_threshold_ = threshold; }

  void factorize(const CsrMatrix& a);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  bool factorized() const;
  Index size() const { return n_; }
  /// min |U_jj| / max |A_ij| of the last factorization.
  double pivot_ratio() const { return pivot_ratio_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Index n_ = 0;
  double pivot_threshold_ = 1e-14;
  double pivot_ratio_ = 0.0;
};

/// One-shot factorize + solve.
Eigen::VectorXd lu_solve(const CsrMatrix& a, const Eigen::VectorXd& b);

}  // namespace dispersim
