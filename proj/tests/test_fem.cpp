#include "dispersim/errors.hpp"
#include "dispersim/fem.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dispersim;

namespace {

const MatrixCoefficient kIdentity = MatrixCoefficient::uniform(Mat2::Identity(), "I");

Mesh reference_triangle() {
  return Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}},
              {{{0, 1}, Marker::OuterBottom}, {{1, 2}, Marker::OuterRight}, {{2, 0}, Marker::OuterLeft}});
}

double integrate_on_reference(std::span<const QuadPoint> rule, int a, int b) {
  double s = 0.0;
  for (const auto& q : rule) {
    const double x = q.bary[1], y = q.bary[2];
    s += q.weight * std::pow(x, a) * std::pow(y, b);
  }
  return 0.5 * s;
}

Eigen::VectorXd nodal(const DofMap& dofs, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd v(dofs.num_nodes());
  for (Index i = 0; i < dofs.num_nodes(); ++i) v(i) = f(dofs.node_coords()[static_cast<std::size_t>(i)]);
  return dofs.restrict_nodes(v);
}

}  // namespace

TEST(Quadrature, ExactnessDegrees) {
  for (int a = 0; a <= 2; ++a) {
    for (int b = 0; a + b <= 2; ++b) {
      EXPECT_NEAR(integrate_on_reference(quad_rule_deg2(), a, b), oracle::monomial_integral(a, b), 1e-15);
    }
  }
  for (int a = 0; a <= 5; ++a) {
    for (int b = 0; a + b <= 5; ++b) {
      EXPECT_NEAR(integrate_on_reference(quad_rule_deg5(), a, b), oracle::monomial_integral(a, b), 1e-15)
          << a << "," << b;
    }
  }
  EXPECT_GT(std::abs(integrate_on_reference(quad_rule_deg5(), 6, 0) - oracle::monomial_integral(6, 0)), 1e-8);
}

TEST(ShapeFunctions, P2PartitionOfUnityAndNodalProperty) {
  const Bary nodes[6] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}};
  double phi[6];
  for (int i = 0; i < 6; ++i) {
    p2_values(nodes[i], phi);
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(phi[j], i == j ? 1.0 : 0.0, 1e-15);
  }
  const Bary b{0.2, 0.3, 0.5};
  p2_values(b, phi);
  double s = 0;
  for (double v : phi) s += v;
  EXPECT_NEAR(s, 1.0, 1e-15);

  const Mesh m = reference_triangle();
  const TriangleGeometry g = triangle_geometry(m, 0);
  Vec2 grad[6];
  p2_gradients(b, g, grad);
  Vec2 sum = Vec2::Zero();
  for (const auto& v : grad) sum += v;
  EXPECT_NEAR(sum.norm(), 0.0, 1e-14);
  // x = sum of nodal x times phi, so sum x_j grad phi_j = e_1.
  const double xs[6] = {0, 1, 0, 0.5, 0.5, 0};
  Vec2 gx = Vec2::Zero();
  for (int j = 0; j < 6; ++j) gx += xs[j] * grad[j];
  EXPECT_NEAR((gx - Vec2(1, 0)).norm(), 0.0, 1e-14);
}

TEST(Assembly, P1ReferenceStiffnessByHand) {
  const Mesh m = reference_triangle();
  const DofMap d = DofMap::build(m, ElementKind::P1);
  const Eigen::MatrixXd k = to_csr(assemble_diffusion(m, d, kIdentity), 3, 3).to_dense();
  Eigen::Matrix3d ref;
  ref << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  EXPECT_LT((k - ref).cwiseAbs().maxCoeff(), 1e-15);
  const Eigen::MatrixXd mass = to_csr(assemble_mass(m, d), 3, 3).to_dense();
  Eigen::Matrix3d mref = Eigen::Matrix3d::Constant(1.0 / 24.0);
  mref.diagonal().setConstant(1.0 / 12.0);
  EXPECT_LT((mass - mref).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(Assembly, MassAndStiffnessInvariants) {
  const Mesh m = build_rect_mesh({0.0, 2.0}, {0.0, 1.0}, 6, 5);
  for (ElementKind kind : {ElementKind::P1, ElementKind::P2}) {
    const DofMap d = DofMap::build(m, kind);
    const Index n = d.num_dofs();
    const CsrMatrix mass = to_csr(assemble_mass(m, d), n, n);
    const CsrMatrix k = to_csr(assemble_diffusion(m, d, kIdentity), n, n);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
    EXPECT_NEAR(one.dot(mass.multiply(one)), 2.0, 1e-13);
    EXPECT_LT(k.multiply(one).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::MatrixXd kd = k.to_dense();
    EXPECT_LT((kd - kd.transpose()).cwiseAbs().maxCoeff(), 1e-13);
    // Energy of u = x is the domain area; of u = x^2 (P2 only) it is int 4x^2 = 32/3.
    const Eigen::VectorXd ux = nodal(d, [](const Point& p) { return p.x(); });
    EXPECT_NEAR(ux.dot(k.multiply(ux)), 2.0, 1e-12);
    if (kind == ElementKind::P2) {
      const Eigen::VectorXd uxx = nodal(d, [](const Point& p) { return p.x() * p.x(); });
      EXPECT_NEAR(uxx.dot(k.multiply(uxx)), 32.0 / 3.0, 1e-11);
      EXPECT_NEAR(uxx.dot(mass.multiply(one)), 8.0 / 3.0, 1e-13);
    }
  }
}

TEST(Assembly, AnisotropicVariableTensorEnergy) {
  // u = x + 2y with D(x) = [[1 + x, 0.5], [0.5, 2]]: grad u^T D grad u = 1 + x + 2 + 8 = 11 + x.
  const Mesh m = build_rect_mesh({0.0, 1.0}, {0.0, 1.0}, 7, 7);
  const DofMap d = DofMap::build(m, ElementKind::P1);
  const MatrixCoefficient dc{[](const Point& p) {
                               Mat2 a;
                               a << 1.0 + p.x(), 0.5, 0.5, 2.0;
                               return a;
                             },
                             false, "var"};
  const CsrMatrix k = to_csr(assemble_diffusion(m, d, dc), d.num_dofs(), d.num_dofs());
  const Eigen::VectorXd u = nodal(d, [](const Point& p) { return p.x() + 2.0 * p.y(); });
  EXPECT_NEAR(u.dot(k.multiply(u)), 11.5, 1e-12);
}

TEST(Assembly, LoadVectorIntegrals) {
  const Mesh m = build_rect_mesh({0.0, 1.0}, {0.0, 1.0}, 5, 5);
  const DofMap d = DofMap::build(m, ElementKind::P2);
  const ScalarCoefficient f{[](const Point& p) { return p.x() * p.y() * p.y(); }, false, "xy2"};
  const Eigen::VectorXd b = assemble_load(m, d, f);
  EXPECT_NEAR(b.sum(), 1.0 / 6.0, 1e-14);
  const Eigen::VectorXd c = assemble_mean_vector(m, d);
  EXPECT_NEAR(c.sum(), 1.0, 1e-14);
}

TEST(Assembly, PeriodicP2DofCounts) {
  const CellMesh c = build_cell_mesh({}, 6);
  const DofMap p1 = DofMap::build(c.mesh, ElementKind::P1, &c.periodic);
  const DofMap p2 = DofMap::build(c.mesh, ElementKind::P2, &c.periodic);
  EXPECT_EQ(p1.num_dofs(), 36);
  EXPECT_EQ(p2.num_dofs(), 36 * 4);
  EXPECT_TRUE(p2.periodic());
  // Periodic function is representable; non-periodic x is not (slave copies master).
  const Eigen::VectorXd v = nodal(p2, [](const Point& p) { return std::cos(2 * M_PI * p.x()); });
  const Eigen::VectorXd back = p2.expand(v);
  for (Index i = 0; i < p2.num_nodes(); ++i) {
    EXPECT_NEAR(back(i), std::cos(2 * M_PI * p2.node_coords()[static_cast<std::size_t>(i)].x()), 1e-12);
  }
}

TEST(Assembly, PeriodicAdvectionAnnihilatesConstants) {
  const CellMesh c = build_cell_mesh({}, 8);
  const DofMap d = DofMap::build(c.mesh, ElementKind::P1, &c.periodic);
  const VectorCoefficient b{[](const Point& y) { return Vec2(std::sin(2 * M_PI * y.y()), 1.0); }, false, "b"};
  const CsrMatrix a = to_csr(assemble_advection(c.mesh, d, as_element_fn(b), 1.0), d.num_dofs(), d.num_dofs());
  // -int b . grad v = 0 for divergence-free periodic b.
  EXPECT_LT(a.multiply(Eigen::VectorXd::Ones(d.num_dofs())).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assembly, CellRhsAxisContract) {
  const CellMesh c = build_cell_mesh({}, 4);
  const DofMap d = DofMap::build(c.mesh, ElementKind::P1, &c.periodic);
  EXPECT_THROW(assemble_cell_rhs(c.mesh, d, kIdentity, 3), ContractViolation);
  EXPECT_THROW(assemble_cell_rhs(c.mesh, d, kIdentity, 0), ContractViolation);
  EXPECT_LT(assemble_cell_rhs(c.mesh, d, kIdentity, 1).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Dirichlet, ConflictingValuesAreRejected) {
  Triplets t = {{0, 0, 2.0}, {1, 1, 2.0}};
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2);
  const std::vector<Index> dofs = {1, 1};
  const std::vector<double> vals = {1.0, 2.0};
  EXPECT_THROW(apply_dirichlet(t, rhs, dofs, vals), ContractViolation);
  const std::vector<double> same = {3.0, 3.0};
  apply_dirichlet(t, rhs, dofs, same);
  EXPECT_EQ(lu_solve(to_csr(t, 2, 2), rhs)(1), 3.0);
}

TEST(Poisson, P1ConvergesAtSecondOrderInL2) {
  // -Lap u = 2 pi^2 sin(pi x) sin(pi y), u = 0 on the boundary.
  auto exact = [](const Point& p) { return std::sin(M_PI * p.x()) * std::sin(M_PI * p.y()); };
  std::vector<double> errs, hs;
  for (int n : {8, 16, 32}) {
    const Mesh m = build_rect_mesh({0.0, 1.0}, {0.0, 1.0}, n, n);
    const DofMap d = DofMap::build(m, ElementKind::P1);
    Triplets k = assemble_diffusion(m, d, kIdentity);
    Eigen::VectorXd b = assemble_load(m, d, {[&](const Point& p) { return 2 * M_PI * M_PI * exact(p); }, false, "f"});
    const auto bdry = m.boundary_vertices();
    apply_dirichlet(k, b, bdry, std::vector<double>(bdry.size(), 0.0));
    const Eigen::VectorXd u = lu_solve(to_csr(k, d.num_dofs(), d.num_dofs()), b);
    double e2 = 0.0;
    for (Index t = 0; t < m.num_triangles(); ++t) {
      const TriangleGeometry g = triangle_geometry(m, t);
      for (const auto& q : quad_rule_deg5()) {
        const double diff = evaluate(d, u, m, t, q.bary) - exact(g.map(q.bary));
        e2 += q.weight * g.area * diff * diff;
      }
    }
    errs.push_back(std::sqrt(e2));
    hs.push_back(1.0 / n);
  }
  EXPECT_NEAR(std::log(errs[1] / errs[2]) / std::log(2.0), 2.0, 0.1);
  EXPECT_NEAR(std::log(errs[0] / errs[1]) / std::log(2.0), 2.0, 0.15);
}

TEST(ZeroMean, BorderedSystemSelectsMeanFreeSolution) {
  // Periodic Poisson -Lap w = cos(2 pi x): w = cos(2 pi x) / (4 pi^2).
  const CellMesh c = build_cell_mesh({}, 32);
  const DofMap d = DofMap::build(c.mesh, ElementKind::P2, &c.periodic);
  Triplets k = assemble_diffusion(c.mesh, d, kIdentity);
  Eigen::VectorXd b = assemble_load(c.mesh, d, {[](const Point& p) { return std::cos(2 * M_PI * p.x()); }, false, "f"});
  const Eigen::VectorXd mean = assemble_mean_vector(c.mesh, d);
  append_zero_mean(k, b, mean);
  const Index n = d.num_dofs();
  const Eigen::VectorXd x = lu_solve(to_csr(k, n + 1, n + 1), b);
  const Eigen::VectorXd w = x.head(n);
  EXPECT_NEAR(mean.dot(w), 0.0, 1e-14);
  EXPECT_NEAR(x(n), 0.0, 1e-12);
  double maxerr = 0.0;
  const Eigen::VectorXd nodes = d.expand(w);
  for (Index i = 0; i < d.num_nodes(); ++i) {
    const double ex = std::cos(2 * M_PI * d.node_coords()[static_cast<std::size_t>(i)].x()) / (4 * M_PI * M_PI);
    maxerr = std::max(maxerr, std::abs(nodes(i) - ex));
  }
  EXPECT_LT(maxerr, 1e-5);
}
