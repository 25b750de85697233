#include "dispersim/macro.hpp"

#include "dispersim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace dispersim {

namespace {

// Barycentric sub-triangles of the reference triangle after `levels` uniform
// red refinements.
std::vector<std::array<Bary, 3>> subdivide(int levels) {
  std::vector<std::array<Bary, 3>> tris = {{Bary{1, 0, 0}, Bary{0, 1, 0}, Bary{0, 0, 1}}};
  auto mid = [](const Bary& a, const Bary& b) {
    return Bary{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
  };
  for (int l = 0; l < levels; ++l) {
    std::vector<std::array<Bary, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto& t : tris) {
      const Bary m01 = mid(t[0], t[1]);
      const Bary m12 = mid(t[1], t[2]);
      const Bary m20 = mid(t[2], t[0]);
      next.push_back({t[0], m01, m20});
      next.push_back({m01, t[1], m12});
      next.push_back({m20, m12, t[2]});
      next.push_back({m01, m12, m20});
    }
    tris = std::move(next);
  }
  return tris;
}

}  // namespace

MacroProblem::MacroProblem(Mesh mesh, SpaceTimeFunction source, ScalarCoefficient initial,
                           DirichletSpec bc, int load_refine)
    : mesh_(std::move(mesh)),
      source_(std::move(source)),
      initial_(std::move(initial)),
      bc_(std::move(bc)),
      load_refine_(load_refine) {
  if (load_refine_ < 0 || load_refine_ > 6) throw ConfigError("load_refine must be in [0, 6]");
  if (!source_.fn) throw ContractViolation("macro problem needs a source");
  if (!initial_) throw ContractViolation("macro problem needs an initial value");
  dofs_ = DofMap::build(mesh_, ElementKind::P1);
  const Index n = mesh_.num_vertices();
  mass_ = to_csr(assemble_mass(mesh_, dofs_), n, n);

  slots_.resize(static_cast<std::size_t>(mesh_.num_triangles()));
  for (Index t = 0; t < mesh_.num_triangles(); ++t) {
    const auto& tri = mesh_.triangles()[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) slots_[static_cast<std::size_t>(t)][3 * i + j] = mass_.find(tri[i], tri[j]);
    }
  }

  bc_vertices_ = mesh_.boundary_vertices();
  bc_piece_.assign(bc_vertices_.size(), -1);
  for (std::size_t k = 0; k < bc_vertices_.size(); ++k) {
    for (std::size_t p = 0; p < bc_.pieces.size(); ++p) {
      const auto on = mesh_.vertices_with_marker(bc_.pieces[p].marker);
      if (std::binary_search(on.begin(), on.end(), bc_vertices_[k])) {
        bc_piece_[k] = static_cast<int>(p);
        break;
      }
    }
  }
}

Eigen::VectorXd MacroProblem::initial_state() const {
  Eigen::VectorXd u(size());
  for (Index v = 0; v < size(); ++v) u[v] = initial_(mesh_.vertices()[static_cast<std::size_t>(v)]);
  return u;
}

Eigen::VectorXd MacroProblem::load(double t) const {
  if (source_.time_independent && load_cached_) return load_cache_;
  static thread_local std::vector<std::array<Bary, 3>> pieces;
  static thread_local int pieces_level = -1;
  if (pieces_level != load_refine_) {
    pieces = subdivide(load_refine_);
    pieces_level = load_refine_;
  }
  const double piece_weight = 1.0 / static_cast<double>(pieces.size());
  Eigen::VectorXd f = Eigen::VectorXd::Zero(size());
  for (Index tr = 0; tr < mesh_.num_triangles(); ++tr) {
    const auto geo = triangle_geometry(mesh_, tr);
    const auto& tri = mesh_.triangles()[static_cast<std::size_t>(tr)];
    for (const auto& sub : pieces) {
      for (const auto& q : quad_rule_deg5()) {
        Bary b{};
        for (int k = 0; k < 3; ++k) b[k] = q.bary[0] * sub[0][k] + q.bary[1] * sub[1][k] + q.bary[2] * sub[2][k];
        const double w = q.weight * piece_weight * geo.area * source_(t, geo.map(b));
        for (int k = 0; k < 3; ++k) f[tri[k]] += w * b[k];
      }
    }
  }
  if (source_.time_independent) {
    load_cache_ = f;
    load_cached_ = true;
  }
  return f;
}

std::vector<double> MacroProblem::dirichlet_values(double t) const {
  std::vector<double> values(bc_vertices_.size(), 0.0);
  for (std::size_t k = 0; k < bc_vertices_.size(); ++k) {
    if (bc_piece_[k] < 0) continue;
    values[k] = bc_.pieces[static_cast<std::size_t>(bc_piece_[k])].value(
        t, mesh_.vertices()[static_cast<std::size_t>(bc_vertices_[k])]);
  }
  return values;
}

CsrMatrix MacroProblem::system_matrix(const TensorField& tensors, double dt) const {
  if (static_cast<Index>(tensors.size()) != size()) throw ContractViolation("tensor field has wrong length");
  CsrMatrix a = mass_;
  auto& v = a.values();
  for (Index t = 0; t < mesh_.num_triangles(); ++t) {
    const auto geo = triangle_geometry(mesh_, t);
    const auto& tri = mesh_.triangles()[static_cast<std::size_t>(t)];
    // The P1 interpolant of the nodal tensors integrates to area * average.
    const Mat2 dbar = (tensors[tri[0]] + tensors[tri[1]] + tensors[tri[2]]) / 3.0;
    const auto& slot = slots_[static_cast<std::size_t>(t)];
    for (int j = 0; j < 3; ++j) {
      const Vec2 flux = dbar * geo.grad_lambda[j];
      for (int i = 0; i < 3; ++i) {
        v[static_cast<std::size_t>(slot[3 * i + j])] += dt * geo.area * flux.dot(geo.grad_lambda[i]);
      }
    }
  }
  return a;
}

double MacroProblem::sup_initial() const {
  double s = 0.0;
  for (const auto& x : mesh_.vertices()) s = std::max(s, std::abs(initial_(x)));
  return s;
}

double MacroProblem::sup_source(double t) const {
  double s = 0.0;
  for (Index tr = 0; tr < mesh_.num_triangles(); ++tr) {
    const auto geo = triangle_geometry(mesh_, tr);
    for (const auto& q : quad_rule_deg5()) s = std::max(s, std::abs(source_(t, geo.map(q.bary))));
  }
  for (const auto& x : mesh_.vertices()) s = std::max(s, std::abs(source_(t, x)));
  return s;
}

Eigen::VectorXd MacroStepper::step(const Eigen::VectorXd& u_prev, const TensorField& tensors,
                                   double t_n, double dt) {
  if (!(dt > 0.0)) throw ContractViolation("time step must be positive");
  const MacroProblem& pb = *problem_;
  if (u_prev.size() != pb.size()) throw ContractViolation("state has wrong length");
  CsrMatrix a = pb.system_matrix(tensors, dt);
  Eigen::VectorXd rhs = pb.mass().multiply(u_prev) + dt * pb.load(t_n);
  const auto bc_dofs = pb.dirichlet_vertices();
  const auto bc_values = pb.dirichlet_values(t_n);
  apply_dirichlet(a, rhs, bc_dofs, bc_values);
  lu_.factorize(a);
  return lu_.solve(rhs);
}

Eigen::VectorXd implicit_euler_step(const MacroProblem& problem, const Eigen::VectorXd& u_prev,
                                    const TensorField& tensors, double t_n, double dt) {
  MacroStepper stepper(problem);
  return stepper.step(u_prev, tensors, t_n, dt);
}

double l2_space(const CsrMatrix& mass, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(mass.multiply(v))));
}

double l2_space_time(const CsrMatrix& mass, const std::vector<Eigen::VectorXd>& states, double dt) {
  double s = 0.0;
  for (std::size_t n = 1; n < states.size(); ++n) {
    const double l = l2_space(mass, states[n]);
    s += l * l;
  }
  return std::sqrt(dt * s);
}

double l2_space_time_diff(const CsrMatrix& mass, const std::vector<Eigen::VectorXd>& a,
                          const std::vector<Eigen::VectorXd>& b, double dt) {
  if (a.size() != b.size()) throw ContractViolation("trajectories differ in length");
  double s = 0.0;
  for (std::size_t n = 1; n < a.size(); ++n) {
    const double l = l2_space(mass, a[n] - b[n]);
    s += l * l;
  }
  return std::sqrt(dt * s);
}

// ---------------------------------------------------------------------------

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  Point lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  Point hi = -lo;
  for (const auto& v : mesh.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  lo_ = lo;
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0)));
  nx_ = side;
  ny_ = side;
  cell_w_ = std::max((hi.x() - lo.x()) / nx_, 1e-300);
  cell_h_ = std::max((hi.y() - lo.y()) / ny_, 1e-300);
  buckets_.resize(static_cast<std::size_t>(nx_ * ny_));
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
    Point tlo = mesh.vertices()[tri[0]];
    Point thi = tlo;
    for (int k = 1; k < 3; ++k) {
      tlo = tlo.cwiseMin(mesh.vertices()[tri[k]]);
      thi = thi.cwiseMax(mesh.vertices()[tri[k]]);
    }
    const int i0 = std::clamp(static_cast<int>(std::floor((tlo.x() - lo_.x()) / cell_w_)), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>(std::floor((thi.x() - lo_.x()) / cell_w_)), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>(std::floor((tlo.y() - lo_.y()) / cell_h_)), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>(std::floor((thi.y() - lo_.y()) / cell_h_)), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(t);
    }
  }
}

std::pair<Index, Bary> PointLocator::locate(const Point& x, double tol) const {
  const int i = std::clamp(static_cast<int>(std::floor((x.x() - lo_.x()) / cell_w_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((x.y() - lo_.y()) / cell_h_)), 0, ny_ - 1);
  Index best = -1;
  Bary best_b{};
  double best_min = -std::numeric_limits<double>::infinity();
  for (Index t : buckets_[static_cast<std::size_t>(j * nx_ + i)]) {
    const auto geo = triangle_geometry(*mesh_, t);
    const Point centroid = (geo.x[0] + geo.x[1] + geo.x[2]) / 3.0;
    Bary b;
    for (int k = 0; k < 3; ++k) b[k] = 1.0 / 3.0 + geo.grad_lambda[k].dot(x - centroid);
    const double m = std::min({b[0], b[1], b[2]});
    if (m > best_min) {
      best_min = m;
      best = t;
      best_b = b;
    }
  }
  if (best < 0 || best_min < -tol) {
    throw ContractViolation("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                            ") is outside the mesh");
  }
  return {best, best_b};
}

Eigen::VectorXd interpolate_to(const Mesh& coarse, const Eigen::VectorXd& u, const Mesh& fine) {
  if (u.size() != coarse.num_vertices()) throw ContractViolation("coarse field has wrong length");
  const PointLocator locator(coarse);
  Eigen::VectorXd out(fine.num_vertices());
  for (Index v = 0; v < fine.num_vertices(); ++v) {
    const auto [t, b] = locator.locate(fine.vertices()[static_cast<std::size_t>(v)]);
    const auto& tri = coarse.triangles()[static_cast<std::size_t>(t)];
    out[v] = b[0] * u[tri[0]] + b[1] * u[tri[1]] + b[2] * u[tri[2]];
  }
  return out;
}

double coarse_fine_distance(const Mesh& coarse, const Trajectory& uc, const Mesh& fine,
                            const CsrMatrix& fine_mass, const Trajectory& uf) {
  const std::size_t mc = uc.steps();
  const std::size_t mf = uf.steps();
  if (mc == 0 || mf == 0 || mf % mc != 0) {
    throw ContractViolation("fine step count must be a positive multiple of the coarse one");
  }
  const std::size_t ratio = mf / mc;
  const double dt = uc.times[1] - uc.times[0];
  const PointLocator locator(coarse);
  std::vector<std::pair<Index, Bary>> where;
  where.reserve(static_cast<std::size_t>(fine.num_vertices()));
  for (const auto& x : fine.vertices()) where.push_back(locator.locate(x));

  double s = 0.0;
  for (std::size_t n = 1; n <= mc; ++n) {
    Eigen::VectorXd diff(fine.num_vertices());
    const auto& c = uc.states[n];
    for (Index v = 0; v < fine.num_vertices(); ++v) {
      const auto& [t, b] = where[static_cast<std::size_t>(v)];
      const auto& tri = coarse.triangles()[static_cast<std::size_t>(t)];
      diff[v] = b[0] * c[tri[0]] + b[1] * c[tri[1]] + b[2] * c[tri[2]] - uf.states[n * ratio][v];
    }
    const double l = l2_space(fine_mass, diff);
    s += l * l;
  }
  return std::sqrt(dt * s);
}

void write_field_csv(std::ostream& out, const Mesh& mesh, const Eigen::VectorXd& u) {
  out << "x,y,u\n";
  char buf[96];
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    const Point& x = mesh.vertices()[static_cast<std::size_t>(v)];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x.x(), x.y(), u[v]);
    out << buf;
  }
}

}  // namespace dispersim
