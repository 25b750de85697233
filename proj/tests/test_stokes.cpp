#include "dispersim/errors.hpp"
#include "dispersim/macro.hpp"
#include "dispersim/stokes.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace dispersim;

namespace {

std::shared_ptr<const CellMesh> geometry_one(int n) {
  const std::vector holes = {HoleSpec::ellipse({0.85, 0.75}, 0.1, 0.2), HoleSpec::ellipse({0.35, 0.1}, 0.3, 0.08),
                             HoleSpec::ellipse({0.175, 0.8}, 0.15, 0.15)};
  return std::make_shared<const CellMesh>(build_cell_mesh(holes, n));
}

VectorCoefficient trig_force() {
  return {[](const Point& y) {
            const double s = std::sin(2 * M_PI * y.x());
            return Vec2(10 * s * std::sin(2 * M_PI * y.y()), 10 * s * std::cos(2 * M_PI * y.y()));
          },
          false, "trig"};
}

}  // namespace

TEST(Stokes, GeometryOneDriftIsAdmissible) {
  const auto cell = geometry_one(32);
  const DriftField b = solve_stokes(cell, 0.01, trig_force());
  const DriftReport r = verify_drift(b);
  EXPECT_TRUE(r.pass) << r.summary();
  EXPECT_LE(r.max_wall_velocity, 1e-8);
  EXPECT_LE(r.max_divergence, 1e-8);
  EXPECT_LE(r.periodicity_mismatch, 1e-8);
  EXPECT_LT(b.solve_residual, 1e-8);
  EXPECT_GT(std::max(b.b1.cwiseAbs().maxCoeff(), b.b2.cwiseAbs().maxCoeff()), 1.0);
}

TEST(Stokes, ZeroForceGivesZeroDrift) {
  const DriftField b = solve_stokes(geometry_one(16), 0.01, VectorCoefficient::uniform(Vec2::Zero(), "zero"));
  EXPECT_EQ(b.b1.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.b2.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Stokes, DiscreteGradientForcingIsAbsorbedByPressure) {
  // F = grad(I_h g) with g periodic and P1: B = 0, p = I_h g - mean solves the
  // discrete system exactly.
  const auto cell = geometry_one(24);
  const Mesh& mesh = cell->mesh;
  auto g = [](const Point& y) { return std::sin(2 * M_PI * y.x()) * std::cos(2 * M_PI * y.y()); };
  auto locator = std::make_shared<PointLocator>(mesh);
  const VectorCoefficient f{[&, locator](const Point& y) {
                              const auto [t, bary] = locator->locate(y);
                              (void)bary;
                              const TriangleGeometry geo = triangle_geometry(mesh, t);
                              Vec2 grad = Vec2::Zero();
                              for (int k = 0; k < 3; ++k) grad += g(geo.x[k]) * geo.grad_lambda[k];
                              return grad;
                            },
                            false, "grad"};
  const DriftField b = solve_stokes(cell, 0.37, f);
  EXPECT_LT(b.b1.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(b.b2.cwiseAbs().maxCoeff(), 1e-10);

  Eigen::VectorXd gh(mesh.num_vertices());
  for (Index v = 0; v < mesh.num_vertices(); ++v) gh(v) = g(mesh.vertices()[v]);
  double mean_g = 0.0, mean_p = 0.0, area = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.triangle_area(t);
    for (Index v : mesh.triangles()[t]) {
      mean_g += a / 3 * gh(v);
      mean_p += a / 3 * b.pressure(v);
    }
    area += a;
  }
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    EXPECT_NEAR(b.pressure(v) - mean_p / area, gh(v) - mean_g / area, 1e-9);
  }
  EXPECT_NEAR(mean_p, 0.0, 1e-12);
}

TEST(Stokes, ShearFlowOnHoleFreeCell) {
  // -mu B1'' = sin(2 pi y2):  B1 = sin(2 pi y2) / (4 pi^2 mu),  B2 = 0,  p = 0.
  const double mu = 0.5;
  const auto cell = std::make_shared<const CellMesh>(build_cell_mesh({}, 16));
  const VectorCoefficient f{[](const Point& y) { return Vec2(std::sin(2 * M_PI * y.y()), 0.0); }, false, "shear"};
  const DriftField b = solve_stokes(cell, mu, f);
  const auto& nodes = b.velocity_dofs.node_coords();
  double err = 0.0;
  const double scale = 1.0 / (4 * M_PI * M_PI * mu);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    err = std::max(err, std::abs(b.b1(static_cast<Index>(i)) - scale * std::sin(2 * M_PI * nodes[i].y())));
  }
  EXPECT_LT(err, 1e-3 * scale);
  EXPECT_LT(b.b2.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(verify_drift(b).pass);
}

TEST(Stokes, SampleReproducesNodalValues) {
  const DriftField b = solve_stokes(geometry_one(16), 0.01, trig_force());
  const auto& en = b.velocity_dofs.element_nodes(5);
  const Vec2 at_vertex = b.sample(5, {1.0, 0.0, 0.0});
  EXPECT_NEAR(at_vertex.x(), b.b1(en[0]), 1e-14);
  const Vec2 at_mid = b.sample(5, {0.5, 0.5, 0.0});
  EXPECT_NEAR(at_mid.y(), b.b2(en[3]), 1e-14);
}

TEST(Stokes, CsvHasOneRowPerVertex) {
  const auto cell = geometry_one(12);
  const DriftField b = solve_stokes(cell, 0.01, trig_force());
  std::stringstream ss;
  write_drift_csv(ss, b);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "x,y,B1,B2");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  EXPECT_EQ(rows, cell->mesh.num_vertices());
}

TEST(Stokes, RejectsNonPositiveViscosity) {
  EXPECT_THROW(solve_stokes(geometry_one(16), 0.0, trig_force()), ContractViolation);
}
