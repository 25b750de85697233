#include "dispersim/stokes.hpp"

#include "dispersim/errors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace dispersim {

Vec2 DriftField::sample(Index t, const Bary& bary) const {
  std::array<double, 6> v;
  p2_values(bary, v.data());
  const auto& nodes = velocity_dofs.element_nodes(t);
  Vec2 out = Vec2::Zero();
  for (int i = 0; i < 6; ++i) {
    out.x() += v[i] * b1[nodes[i]];
    out.y() += v[i] * b2[nodes[i]];
  }
  return out;
}

ElementVectorFn DriftField::sampler() const {
  return [this](Index t, const Bary& bary, const Point&) { return sample(t, bary); };
}

DriftField solve_stokes(std::shared_ptr<const CellMesh> cell, double mu, const VectorCoefficient& force) {
  if (!cell) throw ContractViolation("solve_stokes needs a cell mesh");
  if (!(mu > 0.0)) throw ContractViolation("viscosity must be positive");
  const Mesh& mesh = cell->mesh;

  DriftField out;
  out.cell = cell;
  out.mu = mu;
  out.force_name = force.name;
  out.velocity_dofs = DofMap::build(mesh, ElementKind::P2, &cell->periodic);
  out.pressure_dofs = DofMap::build(mesh, ElementKind::P1, &cell->periodic);
  const DofMap& vd = out.velocity_dofs;
  const DofMap& pd = out.pressure_dofs;

  const Index nu = vd.num_dofs();
  const Index np = pd.num_dofs();
  const bool has_holes = mesh.has_marker(Marker::Hole);
  const Index p0 = 2 * nu;
  const Index lam_p = p0 + np;
  const Index lam_v = lam_p + 1;
  const Index n = has_holes ? lam_p + 1 : lam_p + 3;

  Triplets a;
  a.reserve(static_cast<std::size_t>(mesh.num_triangles()) * (2 * 36 + 4 * 18));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  std::array<double, 6> phi;
  std::array<Vec2, 6> dphi;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto geo = triangle_geometry(mesh, t);
    Eigen::Matrix<double, 6, 6> k = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 3, 6> bx = Eigen::Matrix<double, 3, 6>::Zero();
    Eigen::Matrix<double, 3, 6> by = Eigen::Matrix<double, 3, 6>::Zero();
    Eigen::Matrix<double, 6, 2> f = Eigen::Matrix<double, 6, 2>::Zero();
    for (const auto& q : quad_rule_deg5()) {
      p2_values(q.bary, phi.data());
      p2_gradients(q.bary, geo, dphi.data());
      const double w = q.weight * geo.area;
      const Vec2 fq = force(geo.map(q.bary));
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) k(i, j) += w * dphi[i].dot(dphi[j]);
        f(i, 0) += w * fq.x() * phi[i];
        f(i, 1) += w * fq.y() * phi[i];
        for (int m = 0; m < 3; ++m) {
          bx(m, i) -= w * q.bary[m] * dphi[i].x();
          by(m, i) -= w * q.bary[m] * dphi[i].y();
        }
      }
    }
    const auto& ud = vd.element_dofs(t);
    const auto& qd = pd.element_dofs(t);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        a.push_back({ud[i], ud[j], mu * k(i, j)});
        a.push_back({nu + ud[i], nu + ud[j], mu * k(i, j)});
      }
      rhs[ud[i]] += f(i, 0);
      rhs[nu + ud[i]] += f(i, 1);
      for (int m = 0; m < 3; ++m) {
        const Index pr = p0 + qd[m];
        a.push_back({ud[i], pr, bx(m, i)});
        a.push_back({nu + ud[i], pr, by(m, i)});
        a.push_back({pr, ud[i], bx(m, i)});
        a.push_back({pr, nu + ud[i], by(m, i)});
      }
    }
  }

  const Eigen::VectorXd pmean = assemble_mean_vector(mesh, pd);
  for (Index k = 0; k < np; ++k) {
    a.push_back({p0 + k, lam_p, pmean[k]});
    a.push_back({lam_p, p0 + k, pmean[k]});
  }
  if (!has_holes) {
    const Eigen::VectorXd vmean = assemble_mean_vector(mesh, vd);
    for (Index j = 0; j < nu; ++j) {
      if (vmean[j] == 0.0) continue;
      a.push_back({j, lam_v, vmean[j]});
      a.push_back({lam_v, j, vmean[j]});
      a.push_back({nu + j, lam_v + 1, vmean[j]});
      a.push_back({lam_v + 1, nu + j, vmean[j]});
    }
  } else {
    const auto wall = vd.dofs_on_marker(mesh, Marker::Hole);
    std::vector<Index> rows;
    rows.reserve(2 * wall.size());
    for (Index d : wall) {
      rows.push_back(d);
      rows.push_back(nu + d);
    }
    const std::vector<double> zeros(rows.size(), 0.0);
    apply_dirichlet(a, rhs, rows, zeros);
  }

  const CsrMatrix system = to_csr(a, n, n);
  LuSolver lu;
  lu.factorize(system);
  const Eigen::VectorXd x = lu.solve(rhs);
  out.solve_residual = (system.multiply(x) - rhs).lpNorm<Eigen::Infinity>();

  out.b1 = vd.expand(x.segment(0, nu));
  out.b2 = vd.expand(x.segment(nu, nu));
  out.pressure = pd.expand(x.segment(p0, np));
  return out;
}

DriftReport verify_drift(const DriftField& b, double tolerance) {
  if (!b.cell) throw ContractViolation("drift field has no mesh");
  const Mesh& mesh = b.cell->mesh;
  const DofMap& vd = b.velocity_dofs;
  const DofMap& pd = b.pressure_dofs;
  DriftReport r;
  r.tolerance = tolerance;

  const Index nv = mesh.num_vertices();
  auto check_wall = [&](Index node) {
    const double mag = std::hypot(b.b1[node], b.b2[node]);
    if (mag >= r.max_wall_velocity) {
      r.max_wall_velocity = mag;
      r.wall_location = vd.node_coords()[node];
    }
  };
  for (Index v : mesh.vertices_with_marker(Marker::Hole)) check_wall(v);
  for (Index e : mesh.edges_with_marker(Marker::Hole)) check_wall(nv + e);

  Eigen::VectorXd div = Eigen::VectorXd::Zero(pd.num_dofs());
  std::array<Vec2, 6> dphi;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto geo = triangle_geometry(mesh, t);
    const auto& nodes = vd.element_nodes(t);
    const auto& qd = pd.element_dofs(t);
    for (const auto& q : quad_rule_deg2()) {
      p2_gradients(q.bary, geo, dphi.data());
      double d = 0.0;
      for (int i = 0; i < 6; ++i) d += b.b1[nodes[i]] * dphi[i].x() + b.b2[nodes[i]] * dphi[i].y();
      const double w = q.weight * geo.area * d;
      for (int m = 0; m < 3; ++m) div[qd[m]] += w * q.bary[m];
    }
  }
  for (Index k = 0; k < div.size(); ++k) {
    if (std::abs(div[k]) > r.max_divergence) {
      r.max_divergence = std::abs(div[k]);
      r.divergence_dof = k;
    }
  }

  std::vector<Index> first_node(static_cast<std::size_t>(vd.num_dofs()), -1);
  for (Index node = 0; node < vd.num_nodes(); ++node) {
    auto& f = first_node[static_cast<std::size_t>(vd.node_to_dof()[node])];
    if (f < 0) {
      f = node;
      continue;
    }
    r.periodicity_mismatch = std::max({r.periodicity_mismatch, std::abs(b.b1[node] - b.b1[f]),
                                       std::abs(b.b2[node] - b.b2[f])});
  }

  r.pass = r.max_wall_velocity <= tolerance && r.max_divergence <= tolerance &&
           r.periodicity_mismatch <= tolerance;
  return r;
}

std::string DriftReport::summary() const {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << "wall |B| max " << max_wall_velocity << " at (" << wall_location.x()
    << ", " << wall_location.y() << "); |int q div B| max " << max_divergence
    << "; periodicity mismatch " << periodicity_mismatch << "; " << (pass ? "PASS" : "FAIL");
  return s.str();
}

void write_drift_csv(std::ostream& out, const DriftField& b) {
  const Mesh& mesh = b.cell->mesh;
  out << "x,y,B1,B2\n";
  char buf[128];
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    const Point& x = mesh.vertices()[v];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", x.x(), x.y(), b.b1[v], b.b2[v]);
    out << buf;
  }
}

}  // namespace dispersim
