#pragma once

#include "dispersim/fem.hpp"
#include "dispersim/mesh.hpp"
#include "dispersim/sparse.hpp"
#include "dispersim/stokes.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>

namespace dispersim {

using DispersionTensor = Mat2;

/// Everything about the p-parameterized cell problem that does not depend on
/// p: the P1 periodic dof map, the diffusion matrix int D grad w . grad v, the
/// unit advection matrix -int (B w) . grad v, both right-hand sides, the mean
/// vector and the pieces of the tensor integral. The per-p matrix is
/// (A + p C) bordered by the mean constraint.
class CellContext {
 public:
  /// `drift` may be null, meaning B = 0.
  CellContext(std::shared_ptr<const CellMesh> cell, MatrixCoefficient d,
              std::shared_ptr<const DriftField> drift);

  const Mesh& mesh() const { return cell_->mesh; }
  const CellMesh& cell() const { return *cell_; }
  const DofMap& dofs() const { return dofs_; }
  const MatrixCoefficient& diffusion_coefficient() const { return d_; }
  const DriftField* drift() const { return drift_.get(); }
  double cell_measure() const { return measure_; }
  const std::string& geometry_hash() const { return hash_; }

  const CsrMatrix& diffusion() const { return a_; }
  const CsrMatrix& advection() const { return c_; }
  const Eigen::VectorXd& rhs(int axis) const;
  const Eigen::VectorXd& mean_vector() const { return mean_; }

  /// Bordered system for parameter p, rows of the cell block divided by
  /// max(1, |p|) so that the constraint row stays well scaled.
  CsrMatrix bordered_matrix(double p) const;
  double row_scale(double p) const;

  /// Columns i of  int D grad eta_j  (2 x N) and  int D  (2 x 2).
  const Eigen::Matrix2Xd& flux_weights() const { return g_; }
  const Mat2& integral_of_d() const { return d_int_; }

 private:
  friend class CellWorkspace;
  std::shared_ptr<const CellMesh> cell_;
  MatrixCoefficient d_;
  std::shared_ptr<const DriftField> drift_;
  DofMap dofs_;
  CsrMatrix a_;
  CsrMatrix c_;
  Eigen::VectorXd rhs1_;
  Eigen::VectorXd rhs2_;
  Eigen::VectorXd mean_;
  Eigen::Matrix2Xd g_;
  Mat2 d_int_ = Mat2::Zero();
  double measure_ = 0.0;
  std::string hash_;

  // Bordered pattern with the positions of A and C entries in it.
  CsrMatrix pattern_;
  std::vector<std::ptrdiff_t> a_slot_;
  std::vector<std::ptrdiff_t> c_slot_;
  std::vector<std::ptrdiff_t> border_slot_;  // 2 per dof: (j, N) and (N, j)
};

struct CellSolution {
  double p = 0.0;
  Eigen::VectorXd w1;  // dof coefficients, mean zero
  Eigen::VectorXd w2;
  double multiplier1 = 0.0;
  double multiplier2 = 0.0;
};

/// Reusable factorization storage for repeated solves on one context. One
/// workspace per worker thread.
class CellWorkspace {
 public:
  CellSolution solve(const CellContext& ctx, double p);

 private:
  LuSolver lu_;
  CsrMatrix matrix_;
};

CellSolution solve_cell(const CellContext& ctx, double p);

/// D*(W) = (1/|Y|) int D (I + [grad w1  grad w2]).
DispersionTensor dispersion_tensor(const CellContext& ctx, const CellSolution& sol);

struct AssumptionReport {
  double theta = 0.0;     // smallest eigenvalue of sym(D) over the samples
  double max_norm = 0.0;  // largest spectral norm of D over the samples
  bool pass = false;
};

/// Samples D at the 7-point quadrature nodes of every triangle.
AssumptionReport check_assumptions(const MatrixCoefficient& d, const Mesh& mesh);

}  // namespace dispersim
