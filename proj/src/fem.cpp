#include "dispersim/fem.hpp"

#include "dispersim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace dispersim {

namespace {

constexpr double kSqrt15 = 3.872983346207416885;
constexpr double kA1 = (6.0 - kSqrt15) / 21.0;
constexpr double kA2 = (6.0 + kSqrt15) / 21.0;
constexpr double kW1 = (155.0 - kSqrt15) / 1200.0;
constexpr double kW2 = (155.0 + kSqrt15) / 1200.0;

constexpr std::array<QuadPoint, 3> kDeg2 = {{
    {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}, 1.0 / 3.0},
}};

constexpr std::array<QuadPoint, 7> kDeg5 = {{
    {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 40.0},
    {{kA1, kA1, 1.0 - 2.0 * kA1}, kW1},
    {{kA1, 1.0 - 2.0 * kA1, kA1}, kW1},
    {{1.0 - 2.0 * kA1, kA1, kA1}, kW1},
    {{kA2, kA2, 1.0 - 2.0 * kA2}, kW2},
    {{kA2, 1.0 - 2.0 * kA2, kA2}, kW2},
    {{1.0 - 2.0 * kA2, kA2, kA2}, kW2},
}};

void check_dofmap(const Mesh& mesh, const DofMap& dofs) {
  if (dofs.num_triangles() != mesh.num_triangles()) {
    throw ContractViolation("dof map does not belong to this mesh");
  }
}

// Shape values and gradients of either element at one quadrature point.
struct Shape {
  std::array<double, 6> v{};
  std::array<Vec2, 6> g{};
};

void shape_at(ElementKind kind, const Bary& b, const TriangleGeometry& geo, Shape& s) {
  if (kind == ElementKind::P1) {
    p1_values(b, s.v.data());
    for (int k = 0; k < 3; ++k) s.g[static_cast<std::size_t>(k)] = geo.grad_lambda[static_cast<std::size_t>(k)];
  } else {
    p2_values(b, s.v.data());
    p2_gradients(b, geo, s.g.data());
  }
}

std::uint64_t pair_key(Index a, Index b) {
  return (static_cast<std::uint64_t>(std::max(a, b)) << 32) | static_cast<std::uint64_t>(std::min(a, b));
}

}  // namespace

std::span<const QuadPoint> quad_rule_deg2() { return kDeg2; }
std::span<const QuadPoint> quad_rule_deg5() { return kDeg5; }

TriangleGeometry triangle_geometry(const Mesh& mesh, Index t) {
  TriangleGeometry g;
  const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
  for (int k = 0; k < 3; ++k) g.x[static_cast<std::size_t>(k)] = mesh.vertices()[tri[static_cast<std::size_t>(k)]];
  const Vec2 e1 = g.x[1] - g.x[0];
  const Vec2 e2 = g.x[2] - g.x[0];
  const double det = e1.x() * e2.y() - e1.y() * e2.x();
  g.area = 0.5 * det;
  // grad lambda_k is the inward normal of the opposite edge scaled by 1/(2 area).
  g.grad_lambda[1] = Vec2(e2.y(), -e2.x()) / det;
  g.grad_lambda[2] = Vec2(-e1.y(), e1.x()) / det;
  g.grad_lambda[0] = -g.grad_lambda[1] - g.grad_lambda[2];
  return g;
}

void p1_values(const Bary& b, double* out) {
  out[0] = b[0];
  out[1] = b[1];
  out[2] = b[2];
}

void p2_values(const Bary& b, double* out) {
  out[0] = b[0] * (2.0 * b[0] - 1.0);
  out[1] = b[1] * (2.0 * b[1] - 1.0);
  out[2] = b[2] * (2.0 * b[2] - 1.0);
  out[3] = 4.0 * b[0] * b[1];
  out[4] = 4.0 * b[1] * b[2];
  out[5] = 4.0 * b[2] * b[0];
}

void p2_gradients(const Bary& b, const TriangleGeometry& g, Vec2* out) {
  const auto& gl = g.grad_lambda;
  out[0] = (4.0 * b[0] - 1.0) * gl[0];
  out[1] = (4.0 * b[1] - 1.0) * gl[1];
  out[2] = (4.0 * b[2] - 1.0) * gl[2];
  out[3] = 4.0 * (b[0] * gl[1] + b[1] * gl[0]);
  out[4] = 4.0 * (b[1] * gl[2] + b[2] * gl[1]);
  out[5] = 4.0 * (b[2] * gl[0] + b[0] * gl[2]);
}

// ---------------------------------------------------------------------------

DofMap DofMap::build(const Mesh& mesh, ElementKind kind, const PeriodicMap* periodic) {
  DofMap map;
  map.kind_ = kind;
  map.periodic_ = periodic != nullptr;
  const auto nv = static_cast<std::size_t>(mesh.num_vertices());
  const std::size_t nodes = kind == ElementKind::P1 ? nv : nv + static_cast<std::size_t>(mesh.num_edges());

  map.node_coords_.resize(nodes);
  for (std::size_t v = 0; v < nv; ++v) map.node_coords_[v] = mesh.vertices()[v];
  if (kind == ElementKind::P2) {
    for (std::size_t e = 0; e < static_cast<std::size_t>(mesh.num_edges()); ++e) {
      const auto& ed = mesh.edges()[e];
      map.node_coords_[nv + e] = 0.5 * (mesh.vertices()[ed[0]] + mesh.vertices()[ed[1]]);
    }
  }

  std::vector<Index> master(nodes);
  for (std::size_t i = 0; i < nodes; ++i) master[i] = static_cast<Index>(i);
  if (periodic) {
    if (periodic->master_of.size() != nv) throw ContractViolation("periodic map does not match mesh");
    for (std::size_t v = 0; v < nv; ++v) master[v] = periodic->master_of[v];
    if (kind == ElementKind::P2) {
      std::unordered_map<std::uint64_t, Index> edge_id;
      for (std::size_t e = 0; e < static_cast<std::size_t>(mesh.num_edges()); ++e) {
        edge_id.emplace(pair_key(mesh.edges()[e][0], mesh.edges()[e][1]), static_cast<Index>(e));
      }
      auto fold = [&](Marker side, const std::vector<Index>& partner) {
        for (Index e : mesh.edges_with_marker(side)) {
          const auto& ed = mesh.edges()[static_cast<std::size_t>(e)];
          const Index a = partner[static_cast<std::size_t>(ed[0])];
          const Index b = partner[static_cast<std::size_t>(ed[1])];
          auto it = (a >= 0 && b >= 0) ? edge_id.find(pair_key(a, b)) : edge_id.end();
          if (it == edge_id.end()) throw InvalidGeometry("periodic edge without partner edge");
          master[nv + static_cast<std::size_t>(e)] = static_cast<Index>(nv) + it->second;
        }
      };
      fold(Marker::OuterRight, periodic->right_to_left);
      fold(Marker::OuterTop, periodic->top_to_bottom);
    }
  }

  map.node_to_dof_.assign(nodes, -1);
  Index next = 0;
  for (std::size_t i = 0; i < nodes; ++i) {
    if (master[i] == static_cast<Index>(i)) map.node_to_dof_[i] = next++;
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    if (master[i] != static_cast<Index>(i)) {
      const Index m = master[i];
      if (master[static_cast<std::size_t>(m)] != m) throw ContractViolation("periodic chain not resolved");
      map.node_to_dof_[i] = map.node_to_dof_[static_cast<std::size_t>(m)];
    }
  }
  map.num_dofs_ = next;

  const auto nt = static_cast<std::size_t>(mesh.num_triangles());
  map.element_nodes_.resize(nt);
  map.element_dofs_.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    std::array<Index, 6> nodes_t{-1, -1, -1, -1, -1, -1};
    for (int k = 0; k < 3; ++k) nodes_t[static_cast<std::size_t>(k)] = mesh.triangles()[t][static_cast<std::size_t>(k)];
    if (kind == ElementKind::P2) {
      for (int k = 0; k < 3; ++k) {
        nodes_t[static_cast<std::size_t>(3 + k)] =
            static_cast<Index>(nv) + mesh.triangle_edges()[t][static_cast<std::size_t>(k)];
      }
    }
    map.element_nodes_[t] = nodes_t;
    std::array<Index, 6> dofs_t{-1, -1, -1, -1, -1, -1};
    for (int k = 0; k < map.nodes_per_element(); ++k) {
      dofs_t[static_cast<std::size_t>(k)] = map.node_to_dof_[static_cast<std::size_t>(nodes_t[static_cast<std::size_t>(k)])];
    }
    map.element_dofs_[t] = dofs_t;
  }
  return map;
}

Eigen::VectorXd DofMap::expand(const Eigen::VectorXd& dofs) const {
  if (dofs.size() != num_dofs_) throw ContractViolation("dof vector has wrong length");
  Eigen::VectorXd out(num_nodes());
  for (Index i = 0; i < num_nodes(); ++i) out[i] = dofs[node_to_dof_[static_cast<std::size_t>(i)]];
  return out;
}

Eigen::VectorXd DofMap::restrict_nodes(const Eigen::VectorXd& nodes) const {
  if (nodes.size() != num_nodes()) throw ContractViolation("node vector has wrong length");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_dofs_);
  std::vector<char> seen(static_cast<std::size_t>(num_dofs_), 0);
  for (Index i = 0; i < num_nodes(); ++i) {
    const auto d = static_cast<std::size_t>(node_to_dof_[static_cast<std::size_t>(i)]);
    if (!seen[d]) {
      out[static_cast<Index>(d)] = nodes[i];
      seen[d] = 1;
    }
  }
  return out;
}

std::vector<Index> DofMap::dofs_on_marker(const Mesh& mesh, Marker m) const {
  std::vector<Index> out;
  const auto nv = mesh.num_vertices();
  for (Index v : mesh.vertices_with_marker(m)) out.push_back(node_to_dof_[static_cast<std::size_t>(v)]);
  if (kind_ == ElementKind::P2) {
    for (Index e : mesh.edges_with_marker(m)) out.push_back(node_to_dof_[static_cast<std::size_t>(nv + e)]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ElementVectorFn as_element_fn(const VectorCoefficient& b) {
  return [b](Index, const Bary&, const Point& x) { return b(x); };
}

// ---------------------------------------------------------------------------

Triplets assemble_mass(const Mesh& mesh, const DofMap& dofs) {
  check_dofmap(mesh, dofs);
  const auto rule = dofs.kind() == ElementKind::P1 ? quad_rule_deg2() : quad_rule_deg5();
  const int n = dofs.nodes_per_element();
  Triplets out;
  out.reserve(static_cast<std::size_t>(mesh.num_triangles() * n * n));
  Shape s;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto geo = triangle_geometry(mesh, t);
    Eigen::Matrix<double, 6, 6> local = Eigen::Matrix<double, 6, 6>::Zero();
    for (const auto& q : rule) {
      shape_at(dofs.kind(), q.bary, geo, s);
      const double w = q.weight * geo.area;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) local(i, j) += w * s.v[static_cast<std::size_t>(i)] * s.v[static_cast<std::size_t>(j)];
      }
    }
    const auto& d = dofs.element_dofs(t);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out.push_back({d[static_cast<std::size_t>(i)], d[static_cast<std::size_t>(j)], local(i, j)});
    }
  }
  return out;
}

Triplets assemble_diffusion(const Mesh& mesh, const DofMap& dofs, const MatrixCoefficient& d) {
  check_dofmap(mesh, dofs);
  const bool cheap = dofs.kind() == ElementKind::P1 && d.constant;
  const auto rule = cheap ? quad_rule_deg2() : quad_rule_deg5();
  const int n = dofs.nodes_per_element();
  Triplets out;
  out.reserve(static_cast<std::size_t>(mesh.num_triangles() * n * n));
  Shape s;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto geo = triangle_geometry(mesh, t);
    Eigen::Matrix<double, 6, 6> local = Eigen::Matrix<double, 6, 6>::Zero();
    for (const auto& q : rule) {
      shape_at(dofs.kind(), q.bary, geo, s);
      const Mat2 dq = d(geo.map(q.bary));
      const double w = q.weight * geo.area;
      for (int j = 0; j < n; ++j) {
        const Vec2 flux = dq * s.g[static_cast<std::size_t>(j)];
        for (int i = 0; i < n; ++i) local(i, j) += w * flux.dot(s.g[static_cast<std::size_t>(i)]);
      }
    }
    const auto& dd = dofs.element_dofs(t);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out.push_back({dd[static_cast<std::size_t>(i)], dd[static_cast<std::size_t>(j)], local(i, j)});
    }
  }
  return out;
}

Triplets assemble_advection(const Mesh& mesh, const DofMap& dofs, const ElementVectorFn& b,
                            double scale) {
  check_dofmap(mesh, dofs);
  const auto rule = quad_rule_deg5();
  const int n = dofs.nodes_per_element();
  Triplets out;
  out.reserve(static_cast<std::size_t>(mesh.num_triangles() * n * n));
  Shape s;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto geo = triangle_geometry(mesh, t);
    Eigen::Matrix<double, 6, 6> local = Eigen::Matrix<double, 6, 6>::Zero();
    for (const auto& q : rule) {
      shape_at(dofs.kind(), q.bary, geo, s);
      const Vec2 bq = b(t, q.bary, geo.map(q.bary));
      const double w = q.weight * geo.area;
      for (int i = 0; i < n; ++i) {
        const double bgv = bq.dot(s.g[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n; ++j) local(i, j) -= scale * w * s.v[static_cast<std::size_t>(j)] * bgv;
      }
    }
    const auto& dd = dofs.element_dofs(t);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out.push_back({dd[static_cast<std::size_t>(i)], dd[static_cast<std::size_t>(j)], local(i, j)});
    }
  }
  return out;
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const DofMap& dofs, const ScalarCoefficient& f) {
  check_dofmap(mesh, dofs);
  const int n = dofs.nodes_per_element();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs.num_dofs());
  Shape s;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto geo = triangle_geometry(mesh, t);
    const auto& dd = dofs.element_dofs(t);
    for (const auto& q : quad_rule_deg5()) {
      shape_at(dofs.kind(), q.bary, geo, s);
      const double w = q.weight * geo.area * f(geo.map(q.bary));
      for (int i = 0; i < n; ++i) out[dd[static_cast<std::size_t>(i)]] += w * s.v[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

Eigen::VectorXd assemble_cell_rhs(const Mesh& mesh, const DofMap& dofs, const MatrixCoefficient& d,
                                  int axis) {
  if (axis != 1 && axis != 2) throw ContractViolation("cell problem axis must be 1 or 2");
  check_dofmap(mesh, dofs);
  const bool cheap = dofs.kind() == ElementKind::P1 && d.constant;
  const auto rule = cheap ? quad_rule_deg2() : quad_rule_deg5();
  const int n = dofs.nodes_per_element();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs.num_dofs());
  Shape s;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto geo = triangle_geometry(mesh, t);
    const auto& dd = dofs.element_dofs(t);
    for (const auto& q : rule) {
      shape_at(dofs.kind(), q.bary, geo, s);
      const Vec2 dei = d(geo.map(q.bary)).col(axis - 1);
      const double w = q.weight * geo.area;
      for (int i = 0; i < n; ++i) out[dd[static_cast<std::size_t>(i)]] -= w * dei.dot(s.g[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

Eigen::VectorXd assemble_mean_vector(const Mesh& mesh, const DofMap& dofs) {
  return assemble_load(mesh, dofs, ScalarCoefficient::uniform(1.0, "one"));
}

namespace {

std::map<Index, double> dirichlet_rows(std::span<const Index> dofs, std::span<const double> values,
                                       Index n) {
  if (dofs.size() != values.size()) throw ContractViolation("Dirichlet dofs and values differ in length");
  std::map<Index, double> rows;
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    if (dofs[k] < 0 || dofs[k] >= n) throw ContractViolation("Dirichlet dof out of range");
    auto [it, inserted] = rows.emplace(dofs[k], values[k]);
    if (!inserted && it->second != values[k]) {
      throw ContractViolation("conflicting Dirichlet values on dof " + std::to_string(dofs[k]));
    }
  }
  return rows;
}

}  // namespace

void apply_dirichlet(Triplets& system, Eigen::VectorXd& rhs, std::span<const Index> dofs,
                     std::span<const double> values) {
  const auto rows = dirichlet_rows(dofs, values, static_cast<Index>(rhs.size()));
  std::vector<char> fixed(static_cast<std::size_t>(rhs.size()), 0);
  for (const auto& [d, v] : rows) {
    fixed[static_cast<std::size_t>(d)] = 1;
    rhs[d] = v;
  }
  std::erase_if(system, [&](const Triplet& t) { return fixed[static_cast<std::size_t>(t.row)] != 0; });
  for (const auto& [d, v] : rows) system.push_back({d, d, 1.0});
}

void apply_dirichlet(CsrMatrix& system, Eigen::VectorXd& rhs, std::span<const Index> dofs,
                     std::span<const double> values) {
  const auto rows = dirichlet_rows(dofs, values, static_cast<Index>(rhs.size()));
  auto& vals = system.values();
  const auto& off = system.offsets();
  for (const auto& [d, v] : rows) {
    const auto diag = system.find(d, d);
    if (diag < 0) throw ContractViolation("Dirichlet row has no stored diagonal");
    for (Index k = off[static_cast<std::size_t>(d)]; k < off[static_cast<std::size_t>(d) + 1]; ++k) vals[static_cast<std::size_t>(k)] = 0.0;
    vals[static_cast<std::size_t>(diag)] = 1.0;
    rhs[d] = v;
  }
}

void append_zero_mean(Triplets& system, Eigen::VectorXd& rhs, const Eigen::VectorXd& c,
                      double mean_value) {
  const auto n = static_cast<Index>(rhs.size());
  if (c.size() != n) throw ContractViolation("mean vector has wrong length");
  for (Index j = 0; j < n; ++j) {
    if (c[j] == 0.0) continue;
    system.push_back({j, n, c[j]});
    system.push_back({n, j, c[j]});
  }
  rhs.conservativeResize(n + 1);
  rhs[n] = mean_value;
}

double evaluate(const DofMap& dofs, const Eigen::VectorXd& coeffs, const Mesh& mesh, Index t,
                const Bary& b) {
  (void)mesh;
  std::array<double, 6> v{};
  if (dofs.kind() == ElementKind::P1) {
    p1_values(b, v.data());
  } else {
    p2_values(b, v.data());
  }
  const auto& dd = dofs.element_dofs(t);
  double s = 0.0;
  for (int i = 0; i < dofs.nodes_per_element(); ++i) s += v[static_cast<std::size_t>(i)] * coeffs[dd[static_cast<std::size_t>(i)]];
  return s;
}

Vec2 evaluate_gradient(const DofMap& dofs, const Eigen::VectorXd& coeffs, const Mesh& mesh,
                       Index t, const Bary& b) {
  const auto geo = triangle_geometry(mesh, t);
  Shape s;
  shape_at(dofs.kind(), b, geo, s);
  const auto& dd = dofs.element_dofs(t);
  Vec2 g = Vec2::Zero();
  for (int i = 0; i < dofs.nodes_per_element(); ++i) g += coeffs[dd[static_cast<std::size_t>(i)]] * s.g[static_cast<std::size_t>(i)];
  return g;
}

}  // namespace dispersim
