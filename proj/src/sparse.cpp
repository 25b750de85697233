#include "dispersim/sparse.hpp"

#include "dispersim/errors.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dispersim {

CsrMatrix::CsrMatrix(Index rows, Index cols, std::vector<Index> offsets, std::vector<Index> columns,
                     std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      offsets_(std::move(offsets)),
      columns_(std::move(columns)),
      values_(std::move(values)) {
  if (rows_ < 0 || cols_ < 0) throw ContractViolation("negative matrix dimension");
  if (offsets_.size() != static_cast<std::size_t>(rows_) + 1 || offsets_.front() != 0 ||
      static_cast<std::size_t>(offsets_.back()) != columns_.size() ||
      columns_.size() != values_.size()) {
    throw ContractViolation("inconsistent CSR arrays");
  }
  for (Index r = 0; r < rows_; ++r) {
    if (offsets_[r + 1] < offsets_[r]) throw ContractViolation("CSR offsets decrease");
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      if (columns_[k] < 0 || columns_[k] >= cols_) throw ContractViolation("CSR column out of range");
      if (k > offsets_[r] && columns_[k] <= columns_[k - 1]) {
        throw ContractViolation("CSR columns not strictly increasing");
      }
    }
  }
}

std::ptrdiff_t CsrMatrix::find(Index r, Index c) const {
  const auto begin = columns_.begin() + offsets_[r];
  const auto end = columns_.begin() + offsets_[r + 1];
  const auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return -1;
  return it - columns_.begin();
}

double CsrMatrix::coeff(Index r, Index c) const {
  const auto k = find(r, c);
  return k < 0 ? 0.0 : values_[static_cast<std::size_t>(k)];
}

Eigen::VectorXd CsrMatrix::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != cols_) throw ContractViolation("matrix-vector size mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows_);
  for (Index r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k) s += values_[k] * x[columns_[k]];
    y[r] = s;
  }
  return y;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, cols_);
  for (Index r = 0; r < rows_; ++r) {
    for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k) d(r, columns_[k]) += values_[k];
  }
  return d;
}

bool CsrMatrix::same_pattern(const CsrMatrix& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ && offsets_ == other.offsets_ &&
         columns_ == other.columns_;
}

CsrMatrix to_csr(std::span<const Triplet> triplets, Index rows, Index cols) {
  if (rows < 0 || cols < 0) throw ContractViolation("negative matrix dimension");
  std::vector<Triplet> sorted(triplets.begin(), triplets.end());
  for (const auto& t : sorted) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      std::ostringstream msg;
      msg << "triplet (" << t.row << ", " << t.col << ") outside " << rows << "x" << cols;
      throw ContractViolation(msg.str());
    }
  }
  std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.value < b.value;
  });
  std::vector<Index> offsets(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> columns;
  std::vector<double> values;
  columns.reserve(sorted.size());
  values.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size();) {
    const Index r = sorted[i].row;
    const Index c = sorted[i].col;
    double sum = 0.0;
    for (; i < sorted.size() && sorted[i].row == r && sorted[i].col == c; ++i) sum += sorted[i].value;
    columns.push_back(c);
    values.push_back(sum);
    ++offsets[static_cast<std::size_t>(r) + 1];
  }
  for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r) offsets[r + 1] += offsets[r];
  return CsrMatrix(rows, cols, std::move(offsets), std::move(columns), std::move(values));
}

// ---------------------------------------------------------------------------

struct LuSolver::Impl {
  using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  std::vector<Index> offsets;
  std::vector<Index> columns;
  bool analyzed = false;
  bool factorized = false;
};

LuSolver::LuSolver() : impl_(std::make_unique<Impl>()) {}
LuSolver::~LuSolver() = default;
LuSolver::LuSolver(LuSolver&&) noexcept = default;
LuSolver& LuSolver::operator=(LuSolver&&) noexcept = default;

void LuSolver::factorize(const CsrMatrix& a) {
  if (a.rows() != a.cols()) throw ContractViolation("LU needs a square matrix");
  impl_->factorized = false;
  n_ = a.rows();
  if (n_ == 0) {
    impl_->factorized = true;
    return;
  }

  using RowMap = Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>>;
  const RowMap view(a.rows(), a.cols(), static_cast<Index>(a.nonzeros()), a.offsets().data(),
                    a.columns().data(), a.values().data());
  Impl::SpMat m = view;
  m.makeCompressed();

  const bool same = impl_->analyzed && impl_->offsets == a.offsets() && impl_->columns == a.columns();
  if (!same) {
    impl_->lu.analyzePattern(m);
    impl_->offsets = a.offsets();
    impl_->columns = a.columns();
    impl_->analyzed = true;
  }
  impl_->lu.factorize(m);
  if (impl_->lu.info() != Eigen::Success) {
    throw SingularSystem("sparse LU failed: " + impl_->lu.lastErrorMessage());
  }

  double scale = 0.0;
  for (double v : a.values()) scale = std::max(scale, std::abs(v));
  double min_pivot = std::numeric_limits<double>::infinity();
  const auto& l = impl_->lu.matrixU().m_mapL;
  for (Index j = 0; j < n_; ++j) {
    for (typename std::decay_t<decltype(l)>::InnerIterator it(l, j); it; ++it) {
      if (it.index() == j) {
        min_pivot = std::min(min_pivot, std::abs(it.value()));
        break;
      }
    }
  }
  pivot_ratio_ = scale > 0.0 ? min_pivot / scale : 0.0;
  if (!(pivot_ratio_ > pivot_threshold_)) {
    std::ostringstream msg;
    msg << "numerically singular matrix (n=" << n_ << ", min pivot / max entry = " << pivot_ratio_
        << ")";
    throw SingularSystem(msg.str());
  }
  impl_->factorized = true;
}

bool LuSolver::factorized() const { return impl_->factorized; }

Eigen::VectorXd LuSolver::solve(const Eigen::VectorXd& b) const {
  if (!impl_->factorized) throw ContractViolation("solve before factorize");
  if (b.size() != n_) throw ContractViolation("right-hand side size mismatch");
  if (n_ == 0) return Eigen::VectorXd();
  Eigen::VectorXd x = impl_->lu.solve(b);
  return x;
}

Eigen::VectorXd lu_solve(const CsrMatrix& a, const Eigen::VectorXd& b) {
  LuSolver lu;
  lu.factorize(a);
  return lu.solve(b);
}

}  // namespace dispersim
