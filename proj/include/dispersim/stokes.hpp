#pragma once

#include "dispersim/fem.hpp"
#include "dispersim/mesh.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <memory>
#include <string>

namespace dispersim {

/// Taylor-Hood drift on a periodic cell: P2 velocity, P1 pressure.
/// Velocity and pressure are stored per node (slaves included) so the stored
/// field can be audited independently of the dof numbering.
struct DriftField {
  std::shared_ptr<const CellMesh> cell;
  DofMap velocity_dofs;  // P2, periodic
  DofMap pressure_dofs;  // P1, periodic
  Eigen::VectorXd b1;    // per P2 node
  Eigen::VectorXd b2;
  Eigen::VectorXd pressure;  // per vertex
  double mu = 1.0;
  std::string force_name;
  /// max |A x - b| of the saddle system after the solve.
  double solve_residual = 0.0;

  /// B at barycentric point `bary` of triangle t, from the P2 shape functions.
  Vec2 sample(Index t, const Bary& bary) const;
  ElementVectorFn sampler() const;
};

/// Solves  -mu Lap B + grad p = F,  div B = 0  in Y,  B = 0 on the hole
/// boundary, B and p periodic, mean(p) = 0. Without holes each velocity
/// component additionally gets a zero-mean constraint.
DriftField solve_stokes(std::shared_ptr<const CellMesh> cell, double mu, const VectorCoefficient& force);

struct DriftReport {
  double max_wall_velocity = 0.0;  // max |B| over hole-boundary nodes
  Point wall_location{0.0, 0.0};
  double max_divergence = 0.0;  // max over P1 test functions q of |int q div B|
  Index divergence_dof = -1;
  double periodicity_mismatch = 0.0;
  double tolerance = 1e-8;
  bool pass = false;

  std::string summary() const;
};

DriftReport verify_drift(const DriftField& b, double tolerance = 1e-8);

/// CSV `x,y,B1,B2` at the mesh vertices.
void write_drift_csv(std::ostream& out, const DriftField& b);

}  // namespace dispersim
