#include "dispersim/cell.hpp"

#include "dispersim/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dispersim {

CellContext::CellContext(std::shared_ptr<const CellMesh> cell, MatrixCoefficient d,
                         std::shared_ptr<const DriftField> drift)
    : cell_(std::move(cell)), d_(std::move(d)), drift_(std::move(drift)) {
  if (!cell_) throw ContractViolation("cell context needs a cell mesh");
  if (!d_) throw ContractViolation("cell context needs a diffusion coefficient");
  if (drift_ && drift_->cell.get() != cell_.get() &&
      drift_->cell->mesh.num_triangles() != cell_->mesh.num_triangles()) {
    throw ContractViolation("drift field lives on a different mesh");
  }
  const Mesh& m = cell_->mesh;
  dofs_ = DofMap::build(m, ElementKind::P1, &cell_->periodic);
  const Index n = dofs_.num_dofs();
  measure_ = measure(m);
  hash_ = dispersim::geometry_hash(m);

  a_ = to_csr(assemble_diffusion(m, dofs_, d_), n, n);
  if (drift_) {
    c_ = to_csr(assemble_advection(m, dofs_, drift_->sampler(), 1.0), n, n);
  } else {
    c_ = to_csr(Triplets{}, n, n);
  }
  rhs1_ = assemble_cell_rhs(m, dofs_, d_, 1);
  rhs2_ = assemble_cell_rhs(m, dofs_, d_, 2);
  mean_ = assemble_mean_vector(m, dofs_);

  g_ = Eigen::Matrix2Xd::Zero(2, n);
  d_int_.setZero();
  for (Index t = 0; t < m.num_triangles(); ++t) {
    const auto geo = triangle_geometry(m, t);
    const auto& dd = dofs_.element_dofs(t);
    Mat2 dsum = Mat2::Zero();
    for (const auto& q : quad_rule_deg5()) dsum += q.weight * geo.area * d_(geo.map(q.bary));
    d_int_ += dsum;
    // grad eta_j is constant on the triangle, so int D grad eta_j = (int D) grad eta_j.
    for (int k = 0; k < 3; ++k) g_.col(dd[k]) += dsum * geo.grad_lambda[k];
  }

  Triplets shape;
  shape.reserve(a_.nonzeros() + c_.nonzeros() + 2 * static_cast<std::size_t>(n) + 1);
  for (Index r = 0; r < n; ++r) {
    for (Index k = a_.offsets()[r]; k < a_.offsets()[r + 1]; ++k) shape.push_back({r, a_.columns()[k], 0.0});
    for (Index k = c_.offsets()[r]; k < c_.offsets()[r + 1]; ++k) shape.push_back({r, c_.columns()[k], 0.0});
    shape.push_back({r, n, 0.0});
    shape.push_back({n, r, 0.0});
  }
  pattern_ = to_csr(shape, n + 1, n + 1);
  for (Index r = 0; r < n; ++r) {
    for (Index k = a_.offsets()[r]; k < a_.offsets()[r + 1]; ++k) a_slot_.push_back(pattern_.find(r, a_.columns()[k]));
    for (Index k = c_.offsets()[r]; k < c_.offsets()[r + 1]; ++k) c_slot_.push_back(pattern_.find(r, c_.columns()[k]));
    border_slot_.push_back(pattern_.find(r, n));
    border_slot_.push_back(pattern_.find(n, r));
  }
}

const Eigen::VectorXd& CellContext::rhs(int axis) const {
  if (axis == 1) return rhs1_;
  if (axis == 2) return rhs2_;
  throw ContractViolation("cell problem axis must be 1 or 2");
}

double CellContext::row_scale(double p) const { return std::max(1.0, std::abs(p)); }

CsrMatrix CellContext::bordered_matrix(double p) const {
  CsrMatrix m = pattern_;
  auto& v = m.values();
  std::fill(v.begin(), v.end(), 0.0);
  const double s = row_scale(p);
  for (std::size_t k = 0; k < a_slot_.size(); ++k) v[static_cast<std::size_t>(a_slot_[k])] += a_.values()[k] / s;
  for (std::size_t k = 0; k < c_slot_.size(); ++k) v[static_cast<std::size_t>(c_slot_[k])] += p * c_.values()[k] / s;
  for (Index j = 0; j < dofs_.num_dofs(); ++j) {
    v[static_cast<std::size_t>(border_slot_[2 * j])] = mean_[j];
    v[static_cast<std::size_t>(border_slot_[2 * j + 1])] = mean_[j];
  }
  return m;
}

CellSolution CellWorkspace::solve(const CellContext& ctx, double p) {
  if (!std::isfinite(p)) throw ContractViolation("cell parameter p must be finite");
  matrix_ = ctx.bordered_matrix(p);
  try {
    lu_.factorize(matrix_);
  } catch (const SingularSystem& e) {
    throw SingularSystem("cell problem at p = " + std::to_string(p) + ": " + e.what());
  }
  const Index n = ctx.dofs().num_dofs();
  const double s = ctx.row_scale(p);
  CellSolution sol;
  sol.p = p;
  for (int axis = 1; axis <= 2; ++axis) {
    Eigen::VectorXd b(n + 1);
    b.head(n) = ctx.rhs(axis) / s;
    b[n] = 0.0;
    const Eigen::VectorXd x = lu_.solve(b);
    (axis == 1 ? sol.w1 : sol.w2) = x.head(n);
    (axis == 1 ? sol.multiplier1 : sol.multiplier2) = x[n] * s;
  }
  return sol;
}

CellSolution solve_cell(const CellContext& ctx, double p) {
  CellWorkspace ws;
  return ws.solve(ctx, p);
}

DispersionTensor dispersion_tensor(const CellContext& ctx, const CellSolution& sol) {
  const Index n = ctx.dofs().num_dofs();
  if (sol.w1.size() != n || sol.w2.size() != n) throw ContractViolation("cell solution does not match context");
  DispersionTensor out = ctx.integral_of_d();
  out.col(0) += ctx.flux_weights() * sol.w1;
  out.col(1) += ctx.flux_weights() * sol.w2;
  return out / ctx.cell_measure();
}

AssumptionReport check_assumptions(const MatrixCoefficient& d, const Mesh& mesh) {
  AssumptionReport r;
  r.theta = std::numeric_limits<double>::infinity();
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto geo = triangle_geometry(mesh, t);
    for (const auto& q : quad_rule_deg5()) {
      const Mat2 dq = d(geo.map(q.bary));
      const Mat2 sym = 0.5 * (dq + dq.transpose());
      Eigen::SelfAdjointEigenSolver<Mat2> es(sym, Eigen::EigenvaluesOnly);
      r.theta = std::min(r.theta, es.eigenvalues()[0]);
      Eigen::JacobiSVD<Mat2> svd(dq);
      r.max_norm = std::max(r.max_norm, svd.singularValues()[0]);
    }
  }
  r.pass = std::isfinite(r.theta) && r.theta > 0.0;
  return r;
}

}  // namespace dispersim
