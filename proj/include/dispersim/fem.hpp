#pragma once

#include "dispersim/mesh.hpp"
#include "dispersim/sparse.hpp"
#include "dispersim/types.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace dispersim {

enum class ElementKind { P1, P2 };

using Bary = std::array<double, 3>;

struct QuadPoint {
  Bary bary;
  double weight;  // fraction of the triangle area; weights sum to 1
};

/// 3-point rule, exact for polynomials of degree 2.
std::span<const QuadPoint> quad_rule_deg2();
/// 7-point rule, exact for polynomials of degree 5.
std::span<const QuadPoint> quad_rule_deg5();

struct TriangleGeometry {
  std::array<Point, 3> x;
  double area = 0.0;
  std::array<Vec2, 3> grad_lambda;

  Point map(const Bary& b) const { return b[0] * x[0] + b[1] * x[1] + b[2] * x[2]; }
};

TriangleGeometry triangle_geometry(const Mesh& mesh, Index t);

// P2 local numbering: vertices 0,1,2, then edge midpoints of (0,1), (1,2), (2,0).
void p1_values(const Bary& b, double* out);
void p2_values(const Bary& b, double* out);
void p2_gradients(const Bary& b, const TriangleGeometry& g, Vec2* out);

/// Node numbering and optional periodic reduction. Nodes are the mesh
/// vertices (P1) or vertices followed by edge midpoints (P2); slave nodes are
/// folded into their masters and the remaining nodes are numbered in order.
class DofMap {
 public:
  static DofMap build(const Mesh& mesh, ElementKind kind, const PeriodicMap* periodic = nullptr);

  ElementKind kind() const { return kind_; }
  int nodes_per_element() const { return kind_ == ElementKind::P1 ? 3 : 6; }
  Index num_nodes() const { return static_cast<Index>(node_to_dof_.size()); }
  Index num_dofs() const { return num_dofs_; }
  bool periodic() const { return periodic_; }
  Index num_triangles() const { return static_cast<Index>(element_dofs_.size()); }

  const std::vector<Index>& node_to_dof() const { return node_to_dof_; }
  const std::vector<Point>& node_coords() const { return node_coords_; }
  /// Local dofs of triangle t; only the first nodes_per_element() entries are used.
  const std::array<Index, 6>& element_dofs(Index t) const {
    return element_dofs_[static_cast<std::size_t>(t)];
  }
  const std::array<Index, 6>& element_nodes(Index t) const {
    return element_nodes_[static_cast<std::size_t>(t)];
  }

  /// Nodal values of a dof vector, one value per node (slaves copy masters).
  Eigen::VectorXd expand(const Eigen::VectorXd& dofs) const;
  /// Dof vector from nodal values; slave entries are ignored.
  Eigen::VectorXd restrict_nodes(const Eigen::VectorXd& nodes) const;

  /// Dofs of nodes lying on boundary edges with the given marker.
  std::vector<Index> dofs_on_marker(const Mesh& mesh, Marker m) const;

 private:
  ElementKind kind_ = ElementKind::P1;
  Index num_dofs_ = 0;
  bool periodic_ = false;
  std::vector<Index> node_to_dof_;
  std::vector<Point> node_coords_;
  std::vector<std::array<Index, 6>> element_dofs_;
  std::vector<std::array<Index, 6>> element_nodes_;
};

/// Vector coefficient sampled per element, so P2 fields can be evaluated from
/// their own shape functions at quadrature points.
using ElementVectorFn = std::function<Vec2(Index triangle, const Bary& bary, const Point& x)>;

ElementVectorFn as_element_fn(const VectorCoefficient& b);

/// Mass matrix  int w v.
Triplets assemble_mass(const Mesh& mesh, const DofMap& dofs);
/// Diffusion  int D grad w . grad v  (v test row, w trial column).
Triplets assemble_diffusion(const Mesh& mesh, const DofMap& dofs, const MatrixCoefficient& d);
/// Advection  -scale * int (b w) . grad v.
Triplets assemble_advection(const Mesh& mesh, const DofMap& dofs, const ElementVectorFn& b,
                            double scale);
/// Load  int f v.
Eigen::VectorXd assemble_load(const Mesh& mesh, const DofMap& dofs, const ScalarCoefficient& f);
/// Cell right-hand side  -int D e_i . grad psi,  axis in {1, 2}.
Eigen::VectorXd assemble_cell_rhs(const Mesh& mesh, const DofMap& dofs, const MatrixCoefficient& d,
                                  int axis);
/// Mean vector c_j = int eta_j.
Eigen::VectorXd assemble_mean_vector(const Mesh& mesh, const DofMap& dofs);

/// Row replacement: row d becomes e_d and rhs[d] = value. A dof listed twice
/// with different values is a contract violation.
void apply_dirichlet(Triplets& system, Eigen::VectorXd& rhs, std::span<const Index> dofs,
                     std::span<const double> values);
/// Same on an assembled matrix; the diagonal entry must be stored.
void apply_dirichlet(CsrMatrix& system, Eigen::VectorXd& rhs, std::span<const Index> dofs,
                     std::span<const double> values);

/// Borders an N x N system with the constraint row c^T u = mean_value and the
/// column c; the extra unknown is the Lagrange multiplier.
void append_zero_mean(Triplets& system, Eigen::VectorXd& rhs, const Eigen::VectorXd& c,
                      double mean_value = 0.0);

/// Value and gradient of a scalar field given by dof coefficients.
double evaluate(const DofMap& dofs, const Eigen::VectorXd& coeffs, const Mesh& mesh, Index t,
                const Bary& b);
Vec2 evaluate_gradient(const DofMap& dofs, const Eigen::VectorXd& coeffs, const Mesh& mesh,
                       Index t, const Bary& b);

}  // namespace dispersim
