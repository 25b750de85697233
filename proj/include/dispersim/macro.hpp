#pragma once

#include "dispersim/cell.hpp"
#include "dispersim/fem.hpp"
#include "dispersim/mesh.hpp"
#include "dispersim/sparse.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

namespace dispersim {

/// Dirichlet data on the whole outer boundary. A boundary vertex takes the
/// value of the first piece whose marker touches it; vertices touched by no
/// piece get 0.
struct DirichletSpec {
  struct Piece {
    Marker marker;
    SpaceTimeFunction value;
  };
  std::vector<Piece> pieces;

  static DirichletSpec homogeneous() { return {}; }
};

/// Nodal 2x2 tensors, one per macro vertex.
using TensorField = std::vector<DispersionTensor>;

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;

  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
};

/// Macroscopic P1 problem  du/dt - div(D grad u) = f,  u = g on the boundary,
/// advanced by implicit Euler with a nodal tensor field.
class MacroProblem {
 public:
  /// `load_refine` splits each triangle into 4^load_refine pieces for the
  /// load quadrature, which matters for discontinuous sources.
  MacroProblem(Mesh mesh, SpaceTimeFunction source, ScalarCoefficient initial, DirichletSpec bc,
               int load_refine = 0);

  const Mesh& mesh() const { return mesh_; }
  const CsrMatrix& mass() const { return mass_; }
  Index size() const { return mesh_.num_vertices(); }

  /// P1 interpolant of the initial value (boundary values from bc at t = 0
  /// are not imposed on the initial state).
  Eigen::VectorXd initial_state() const;
  Eigen::VectorXd load(double t) const;
  std::vector<Index> dirichlet_vertices() const { return bc_vertices_; }
  std::vector<double> dirichlet_values(double t) const;

  /// Matrix  M + dt K(D)  with Dirichlet rows not yet replaced.
  CsrMatrix system_matrix(const TensorField& tensors, double dt) const;

  double sup_initial() const;
  double sup_source(double t) const;

 private:
  Mesh mesh_;
  SpaceTimeFunction source_;
  ScalarCoefficient initial_;
  DirichletSpec bc_;
  int load_refine_ = 0;
  DofMap dofs_;
  CsrMatrix mass_;
  std::vector<std::array<std::ptrdiff_t, 9>> slots_;
  std::vector<Index> bc_vertices_;
  std::vector<int> bc_piece_;  // -1: homogeneous
  mutable bool load_cached_ = false;
  mutable Eigen::VectorXd load_cache_;
};

/// One solver instance per trajectory; keeps the symbolic factorization.
class MacroStepper {
 public:
  explicit MacroStepper(const MacroProblem& problem) : problem_(&problem) {}

  /// Solves (M + dt K(tensors)) u_n = M u_prev + dt F(t_n) with boundary rows
  /// replaced by the Dirichlet data at t_n.
  Eigen::VectorXd step(const Eigen::VectorXd& u_prev, const TensorField& tensors, double t_n, double dt);

 private:
  const MacroProblem* problem_;
  LuSolver lu_;
};

Eigen::VectorXd implicit_euler_step(const MacroProblem& problem, const Eigen::VectorXd& u_prev,
                                    const TensorField& tensors, double t_n, double dt);

/// sqrt(v^T M v).
double l2_space(const CsrMatrix& mass, const Eigen::VectorXd& v);
/// sqrt(dt * sum_{n>=1} l2_space(u_n)^2).
double l2_space_time(const CsrMatrix& mass, const std::vector<Eigen::VectorXd>& states, double dt);
/// Same for the nodewise difference of two equally long trajectories.
double l2_space_time_diff(const CsrMatrix& mass, const std::vector<Eigen::VectorXd>& a,
                          const std::vector<Eigen::VectorXd>& b, double dt);

/// Bucket grid of triangles for point location.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);
  /// Triangle containing x and its barycentric coordinates; throws when x is
  /// outside the mesh by more than `tol`.
  std::pair<Index, Bary> locate(const Point& x, double tol = 1e-10) const;

 private:
  const Mesh* mesh_;
  Point lo_;
  double cell_w_ = 1.0;
  double cell_h_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::vector<Index>> buckets_;
};

/// Values of the coarse P1 field at the vertices of `fine`.
Eigen::VectorXd interpolate_to(const Mesh& coarse, const Eigen::VectorXd& u, const Mesh& fine);

/// L2(S; L2) distance between a coarse and a fine trajectory: the coarse
/// states are evaluated at the fine vertices and compared with the fine states
/// at the coarse time stamps. Requires fine steps to be a multiple of coarse.
double coarse_fine_distance(const Mesh& coarse, const Trajectory& uc, const Mesh& fine,
                            const CsrMatrix& fine_mass, const Trajectory& uf);

/// CSV `x,y,u` at the vertices.
void write_field_csv(std::ostream& out, const Mesh& mesh, const Eigen::VectorXd& u);

}  // namespace dispersim
