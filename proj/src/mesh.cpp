#include "dispersim/mesh.hpp"

#include "dispersim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace dispersim {

namespace {

std::uint64_t edge_key(Index a, Index b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

double min_angle(const Point& a, const Point& b, const Point& c) {
  auto angle = [](const Point& p, const Point& q, const Point& r) {
    const Vec2 u = q - p;
    const Vec2 v = r - p;
    const double cross = u.x() * v.y() - u.y() * v.x();
    return std::atan2(std::abs(cross), u.dot(v));
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

}  // namespace

std::string_view marker_name(Marker m) {
  switch (m) {
    case Marker::OuterLeft: return "OUTER_LEFT";
    case Marker::OuterRight: return "OUTER_RIGHT";
    case Marker::OuterBottom: return "OUTER_BOTTOM";
    case Marker::OuterTop: return "OUTER_TOP";
    case Marker::Hole: return "HOLE";
  }
  return "?";
}

Marker parse_marker(std::string_view name) {
  for (Marker m : {Marker::OuterLeft, Marker::OuterRight, Marker::OuterBottom, Marker::OuterTop,
                   Marker::Hole}) {
    if (marker_name(m) == name) return m;
  }
  throw IoError("unknown boundary marker '" + std::string(name) + "'");
}

bool is_outer(Marker m) { return m != Marker::Hole; }

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<Index, 3>> triangles,
           std::vector<BoundaryEdge> boundary_edges)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)) {
  const Index nv = num_vertices();
  if (triangles_.empty()) throw InvalidGeometry("mesh has no triangles");

  std::unordered_map<std::uint64_t, Index> edge_ids;
  edge_ids.reserve(triangles_.size() * 2);
  std::vector<int> edge_count;
  triangle_edges_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (Index v : tri) {
      if (v < 0 || v >= nv) throw InvalidGeometry("triangle references missing vertex");
    }
    const double area = signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    if (!(area > 0.0)) {
      throw InvalidGeometry("triangle " + std::to_string(t) + " has non-positive signed area");
    }
    for (int k = 0; k < 3; ++k) {
      const Index a = tri[k];
      const Index b = tri[(k + 1) % 3];
      auto [it, inserted] = edge_ids.try_emplace(edge_key(a, b), static_cast<Index>(edges_.size()));
      if (inserted) {
        edges_.push_back({std::min(a, b), std::max(a, b)});
        edge_count.push_back(0);
      }
      ++edge_count[static_cast<std::size_t>(it->second)];
      triangle_edges_[t][static_cast<std::size_t>(k)] = it->second;
    }
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_count[e] > 2) throw InvalidGeometry("edge shared by more than two triangles");
  }

  edge_marker_.assign(edges_.size(), -1);
  for (const auto& be : boundary_edges_) {
    auto it = edge_ids.find(edge_key(be.v[0], be.v[1]));
    if (it == edge_ids.end()) throw InvalidGeometry("boundary edge is not a triangle edge");
    if (edge_count[static_cast<std::size_t>(it->second)] != 1) {
      throw InvalidGeometry("boundary edge is shared by two triangles");
    }
    edge_marker_[static_cast<std::size_t>(it->second)] = static_cast<std::int8_t>(be.marker);
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_count[e] == 1 && edge_marker_[e] < 0) {
      throw InvalidGeometry("boundary edge without marker");
    }
  }

  for (Index t = 0; t < num_triangles(); ++t) h_max_ = std::max(h_max_, triangle_diameter(t));
}

double Mesh::triangle_area(Index t) const {
  const auto& tri = triangles_[static_cast<std::size_t>(t)];
  return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double Mesh::triangle_diameter(Index t) const {
  const auto& tri = triangles_[static_cast<std::size_t>(t)];
  const Point& a = vertices_[tri[0]];
  const Point& b = vertices_[tri[1]];
  const Point& c = vertices_[tri[2]];
  return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
}

std::vector<Index> Mesh::vertices_with_marker(Marker m) const {
  std::vector<Index> out;
  for (const auto& be : boundary_edges_) {
    if (be.marker == m) {
      out.push_back(be.v[0]);
      out.push_back(be.v[1]);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Index> Mesh::boundary_vertices() const {
  std::vector<Index> out;
  for (const auto& be : boundary_edges_) {
    out.push_back(be.v[0]);
    out.push_back(be.v[1]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Index> Mesh::edges_with_marker(Marker m) const {
  std::vector<Index> out;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_marker_[e] == static_cast<std::int8_t>(m)) out.push_back(static_cast<Index>(e));
  }
  return out;
}

bool Mesh::has_marker(Marker m) const {
  return std::any_of(boundary_edges_.begin(), boundary_edges_.end(),
                     [m](const BoundaryEdge& be) { return be.marker == m; });
}

// ---------------------------------------------------------------------------

HoleSpec HoleSpec::ellipse(Point center, double r1, double r2) {
  return HoleSpec{Kind::Ellipse, center, Vec2(r1, r2)};
}

HoleSpec HoleSpec::rectangle(double x0, double x1, double y0, double y1) {
  return HoleSpec{Kind::Rectangle, Point(0.5 * (x0 + x1), 0.5 * (y0 + y1)),
                  Vec2(0.5 * (x1 - x0), 0.5 * (y1 - y0))};
}

bool HoleSpec::contains(const Point& y) const {
  const Vec2 d = y - center;
  if (kind == Kind::Ellipse) {
    const double s = d.x() / half_size.x();
    const double t = d.y() / half_size.y();
    return s * s + t * t <= 1.0;
  }
  return std::abs(d.x()) <= half_size.x() && std::abs(d.y()) <= half_size.y();
}

Point HoleSpec::project_to_boundary(const Point& y) const {
  if (kind == Kind::Rectangle) {
    const Point lo = center - half_size;
    const Point hi = center + half_size;
    if (!contains(y)) {
      return Point(std::clamp(y.x(), lo.x(), hi.x()), std::clamp(y.y(), lo.y(), hi.y()));
    }
    const double dl = y.x() - lo.x();
    const double dr = hi.x() - y.x();
    const double db = y.y() - lo.y();
    const double dt = hi.y() - y.y();
    const double m = std::min({dl, dr, db, dt});
    if (m == dl) return Point(lo.x(), y.y());
    if (m == dr) return Point(hi.x(), y.y());
    if (m == db) return Point(y.x(), lo.y());
    return Point(y.x(), hi.y());
  }

  const double a = half_size.x();
  const double b = half_size.y();
  auto at = [&](double th) { return Point(center.x() + a * std::cos(th), center.y() + b * std::sin(th)); };
  auto dist2 = [&](double th) { return (at(th) - y).squaredNorm(); };

  constexpr int samples = 128;
  const double step = 2.0 * std::numbers::pi / samples;
  double best = 0.0;
  double best_d = dist2(0.0);
  for (int k = 1; k < samples; ++k) {
    const double d = dist2(k * step);
    if (d < best_d) {
      best_d = d;
      best = k * step;
    }
  }
  // Golden-section refinement inside the bracketing sample interval.
  double lo = best - step;
  double hi = best + step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = dist2(x1);
  double f2 = dist2(x2);
  for (int it = 0; it < 120; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = dist2(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = dist2(x2);
    }
  }
  return at(0.5 * (lo + hi));
}

double HoleSpec::area() const {
  if (kind == Kind::Ellipse) return std::numbers::pi * half_size.x() * half_size.y();
  return 4.0 * half_size.x() * half_size.y();
}

double HoleSpec::perimeter() const {
  if (kind == Kind::Rectangle) return 4.0 * (half_size.x() + half_size.y());
  // 5-point Gauss-Legendre on 256 panels of [0, 2pi].
  static constexpr std::array<double, 5> xg = {0.0, -0.5384693101056831, 0.5384693101056831,
                                               -0.9061798459386640, 0.9061798459386640};
  static constexpr std::array<double, 5> wg = {0.5688888888888889, 0.4786286704993665,
                                               0.4786286704993665, 0.2369268850561891,
                                               0.2369268850561891};
  const double a = half_size.x();
  const double b = half_size.y();
  constexpr int panels = 256;
  const double hp = 2.0 * std::numbers::pi / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * hp;
    for (std::size_t k = 0; k < xg.size(); ++k) {
      const double th = mid + 0.5 * hp * xg[k];
      sum += wg[k] * std::hypot(a * std::sin(th), b * std::cos(th));
    }
  }
  return 0.5 * hp * sum;
}

// ---------------------------------------------------------------------------

Mesh build_rect_mesh(std::pair<double, double> x_extent, std::pair<double, double> y_extent,
                     int nx, int ny) {
  const double x0 = x_extent.first, x1 = x_extent.second;
  const double y0 = y_extent.first, y1 = y_extent.second;
  if (nx < 1 || ny < 1) throw InvalidGeometry("rectangle mesh needs nx, ny >= 1");
  if (!(x1 > x0) || !(y1 > y0)) throw InvalidGeometry("rectangle has zero or negative extent");

  const auto vid = [nx](int i, int j) { return static_cast<Index>(j * (nx + 1) + i); };
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    const double y = (j == ny) ? y1 : y0 + (y1 - y0) * j / ny;
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? x1 : x0 + (x1 - x0) * i / nx;
      vertices.emplace_back(x, y);
    }
  }
  std::vector<std::array<Index, 3>> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  std::vector<BoundaryEdge> boundary;
  for (int i = 0; i < nx; ++i) boundary.push_back({{vid(i, 0), vid(i + 1, 0)}, Marker::OuterBottom});
  for (int j = 0; j < ny; ++j) boundary.push_back({{vid(nx, j), vid(nx, j + 1)}, Marker::OuterRight});
  for (int i = nx; i > 0; --i) boundary.push_back({{vid(i, ny), vid(i - 1, ny)}, Marker::OuterTop});
  for (int j = ny; j > 0; --j) boundary.push_back({{vid(0, j), vid(0, j - 1)}, Marker::OuterLeft});
  return Mesh(std::move(vertices), std::move(triangles), std::move(boundary));
}

namespace {

// Farthest a grid vertex can sit from a boundary curve that crosses one of its
// edges (half a diagonal); a smaller radius leaves spikes where the curve runs
// across the grid diagonals.
double snap_distance(double h) { return std::sqrt(0.5) * h; }

// Moves interior grid vertices lying within snap_distance of a hole boundary
// onto it, nearest first, before triangles are classified. Without this the
// exposed boundary keeps staircase spikes whose length does not vanish under
// refinement.
template <class OnOuter>
void presnap_grid(std::vector<Point>& xs, const std::vector<std::array<Index, 3>>& tris,
                  std::span<const HoleSpec> holes, int n, OnOuter on_outer) {
  if (holes.empty()) return;
  const double h = 1.0 / n;
  const double min_allowed = 10.0 * std::numbers::pi / 180.0;
  std::vector<std::vector<Index>> incident(xs.size());
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (Index v : tris[t]) incident[static_cast<std::size_t>(v)].push_back(static_cast<Index>(t));
  }
  std::vector<std::pair<double, std::size_t>> order;
  std::vector<Point> target(xs.size());
  for (std::size_t v = 0; v < xs.size(); ++v) {
    if (on_outer(xs[v])) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& hole : holes) {
      const Point q = hole.project_to_boundary(xs[v]);
      const double d = (q - xs[v]).norm();
      if (d < best) {
        best = d;
        target[v] = q;
      }
    }
    if (best > 0.0 && best <= snap_distance(h)) order.emplace_back(best, v);
  }
  std::sort(order.begin(), order.end());
  for (const auto& [d, v] : order) {
    const Point old = xs[v];
    xs[v] = target[v];
    for (Index t : incident[v]) {
      const auto& tri = tris[static_cast<std::size_t>(t)];
      const Point& a = xs[tri[0]];
      const Point& b = xs[tri[1]];
      const Point& c = xs[tri[2]];
      if (!(signed_area(a, b, c) > 0.0) || min_angle(a, b, c) < min_allowed) {
        xs[v] = old;
        break;
      }
    }
  }
}

}  // namespace

CellMesh build_cell_mesh(std::span<const HoleSpec> holes, int n) {
  if (n < 2) throw InvalidGeometry("cell mesh needs n >= 2");
  for (const auto& hole : holes) {
    if (!(hole.half_size.x() > 0.0) || !(hole.half_size.y() > 0.0)) {
      throw InvalidGeometry("hole with non-positive size");
    }
    const Point lo = hole.center - hole.half_size;
    const Point hi = hole.center + hole.half_size;
    if (!(lo.x() > 0.0 && lo.y() > 0.0 && hi.x() < 1.0 && hi.y() < 1.0)) {
      throw InvalidGeometry("hole touches or crosses the cell boundary");
    }
  }

  const Mesh grid = build_rect_mesh({0.0, 1.0}, {0.0, 1.0}, n, n);
  std::vector<Point> gv = grid.vertices();
  const auto& gt = grid.triangles();
  const std::size_t ntri = gt.size();

  const auto on_outer = [](const Point& p) {
    return p.x() == 0.0 || p.x() == 1.0 || p.y() == 0.0 || p.y() == 1.0;
  };
  presnap_grid(gv, gt, holes, n, on_outer);
  // Triangles touching the outer square are always kept so the periodic faces
  // stay complete; a hole closer than one grid layer to them is clipped there.
  std::vector<char> removed(ntri, 0);
  for (std::size_t t = 0; t < ntri; ++t) {
    if (on_outer(gv[gt[t][0]]) || on_outer(gv[gt[t][1]]) || on_outer(gv[gt[t][2]])) continue;
    const Point bary = (gv[gt[t][0]] + gv[gt[t][1]] + gv[gt[t][2]]) / 3.0;
    for (const auto& hole : holes) {
      if (hole.contains(bary)) {
        removed[t] = 1;
        break;
      }
    }
  }

  // Neighbours across each grid edge.
  std::vector<std::array<Index, 2>> edge_tris(static_cast<std::size_t>(grid.num_edges()), {-1, -1});
  for (std::size_t t = 0; t < ntri; ++t) {
    for (Index e : grid.triangle_edges()[t]) {
      auto& slot = edge_tris[static_cast<std::size_t>(e)];
      (slot[0] < 0 ? slot[0] : slot[1]) = static_cast<Index>(t);
    }
  }

  // Fluid connectivity over retained triangles.
  std::vector<int> component(ntri, -1);
  int components = 0;
  for (std::size_t seed = 0; seed < ntri; ++seed) {
    if (removed[seed] || component[seed] >= 0) continue;
    std::queue<std::size_t> todo;
    todo.push(seed);
    component[seed] = components;
    while (!todo.empty()) {
      const std::size_t t = todo.front();
      todo.pop();
      for (Index e : grid.triangle_edges()[t]) {
        for (Index nb : edge_tris[static_cast<std::size_t>(e)]) {
          if (nb < 0) continue;
          const auto u = static_cast<std::size_t>(nb);
          if (!removed[u] && component[u] < 0) {
            component[u] = components;
            todo.push(u);
          }
        }
      }
    }
    ++components;
  }
  if (components == 0) throw InvalidGeometry("holes cover the whole cell");
  if (components > 1) throw InvalidGeometry("fluid region of the cell is disconnected");

  // Compact vertices.
  std::vector<Index> new_id(gv.size(), -1);
  std::vector<Point> vertices;
  for (std::size_t t = 0; t < ntri; ++t) {
    if (removed[t]) continue;
    for (Index v : gt[t]) new_id[static_cast<std::size_t>(v)] = 0;
  }
  for (std::size_t v = 0; v < gv.size(); ++v) {
    if (new_id[v] == 0) {
      new_id[v] = static_cast<Index>(vertices.size());
      vertices.push_back(gv[v]);
    }
  }
  std::vector<std::array<Index, 3>> triangles;
  std::vector<BoundaryEdge> boundary;
  for (const auto& be : grid.boundary_edges()) {
    boundary.push_back({{new_id[static_cast<std::size_t>(be.v[0])],
                         new_id[static_cast<std::size_t>(be.v[1])]},
                        be.marker});
  }
  for (std::size_t t = 0; t < ntri; ++t) {
    if (removed[t]) continue;
    const auto& tri = gt[t];
    triangles.push_back({new_id[static_cast<std::size_t>(tri[0])],
                         new_id[static_cast<std::size_t>(tri[1])],
                         new_id[static_cast<std::size_t>(tri[2])]});
    for (int k = 0; k < 3; ++k) {
      const auto& nbs = edge_tris[static_cast<std::size_t>(grid.triangle_edges()[t][static_cast<std::size_t>(k)])];
      const Index other = nbs[0] == static_cast<Index>(t) ? nbs[1] : nbs[0];
      if (other >= 0 && removed[static_cast<std::size_t>(other)]) {
        boundary.push_back({{new_id[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])],
                             new_id[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 1) % 3)])]},
                            Marker::Hole});
      }
    }
  }

  // Snap exposed vertices onto the analytic hole boundary.
  if (!holes.empty()) {
    const double h = 1.0 / n;
    const double min_allowed = 10.0 * std::numbers::pi / 180.0;
    std::vector<int> hole_degree(vertices.size(), 0);
    for (const auto& be : boundary) {
      if (be.marker != Marker::Hole) continue;
      ++hole_degree[static_cast<std::size_t>(be.v[0])];
      ++hole_degree[static_cast<std::size_t>(be.v[1])];
    }
    std::vector<std::vector<Index>> incident(vertices.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      for (Index v : triangles[t]) incident[static_cast<std::size_t>(v)].push_back(static_cast<Index>(t));
    }
    for (std::size_t v = 0; v < vertices.size(); ++v) {
      if (hole_degree[v] != 2) continue;  // untouched or pinched
      const Point old = vertices[v];
      Point target = old;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& hole : holes) {
        const Point q = hole.project_to_boundary(old);
        const double d = (q - old).norm();
        if (d < best) {
          best = d;
          target = q;
        }
      }
      if (!(best > 0.0) || best > snap_distance(h)) continue;
      vertices[v] = target;
      bool accept = true;
      for (Index t : incident[v]) {
        const auto& tri = triangles[static_cast<std::size_t>(t)];
        const Point& a = vertices[tri[0]];
        const Point& b = vertices[tri[1]];
        const Point& c = vertices[tri[2]];
        if (!(signed_area(a, b, c) > 0.0) || min_angle(a, b, c) < min_allowed) {
          accept = false;
          break;
        }
      }
      if (!accept) vertices[v] = old;
    }
  }

  Mesh mesh(std::move(vertices), std::move(triangles), std::move(boundary));
  PeriodicMap periodic = build_periodic_map(mesh);
  return CellMesh{std::move(mesh), std::move(periodic)};
}

PeriodicMap build_periodic_map(const Mesh& mesh, double tol) {
  const auto& xs = mesh.vertices();
  const auto left = mesh.vertices_with_marker(Marker::OuterLeft);
  const auto right = mesh.vertices_with_marker(Marker::OuterRight);
  const auto bottom = mesh.vertices_with_marker(Marker::OuterBottom);
  const auto top = mesh.vertices_with_marker(Marker::OuterTop);
  if (left.empty() || right.empty() || bottom.empty() || top.empty()) {
    throw InvalidGeometry("periodic map needs all four outer sides marked");
  }
  for (Index v : left) {
    if (std::abs(xs[v].x()) > tol) throw InvalidGeometry("left side vertex off x=0");
  }
  for (Index v : right) {
    if (std::abs(xs[v].x() - 1.0) > tol) throw InvalidGeometry("right side vertex off x=1");
  }
  for (Index v : bottom) {
    if (std::abs(xs[v].y()) > tol) throw InvalidGeometry("bottom side vertex off y=0");
  }
  for (Index v : top) {
    if (std::abs(xs[v].y() - 1.0) > tol) throw InvalidGeometry("top side vertex off y=1");
  }

  const auto nv = static_cast<std::size_t>(mesh.num_vertices());
  PeriodicMap map;
  map.right_to_left.assign(nv, -1);
  map.top_to_bottom.assign(nv, -1);

  auto match = [&](const std::vector<Index>& masters, const std::vector<Index>& slaves, int axis,
                   std::vector<Index>& out, const char* what) {
    std::vector<Index> sorted = masters;
    std::sort(sorted.begin(), sorted.end(),
              [&](Index a, Index b) { return xs[a][axis] < xs[b][axis]; });
    if (sorted.size() != slaves.size()) {
      throw InvalidGeometry(std::string("opposite ") + what + " sides have different vertex counts");
    }
    for (Index s : slaves) {
      const double key = xs[s][axis];
      auto it = std::lower_bound(sorted.begin(), sorted.end(), key - tol,
                                 [&](Index a, double k) { return xs[a][axis] < k; });
      if (it == sorted.end() || std::abs(xs[*it][axis] - key) > tol) {
        throw InvalidGeometry(std::string("no periodic partner on the opposite ") + what + " side");
      }
      out[static_cast<std::size_t>(s)] = *it;
    }
  };
  match(left, right, 1, map.right_to_left, "vertical");
  match(bottom, top, 0, map.top_to_bottom, "horizontal");

  map.master_of.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) map.master_of[v] = static_cast<Index>(v);
  std::vector<char> is_right(nv, 0), is_top(nv, 0);
  for (Index v : right) is_right[static_cast<std::size_t>(v)] = 1;
  for (Index v : top) is_top[static_cast<std::size_t>(v)] = 1;

  for (std::size_t v = 0; v < nv; ++v) {
    if (!is_right[v] && !is_top[v]) continue;
    Index m = static_cast<Index>(v);
    for (int hop = 0; hop < 3; ++hop) {
      const auto mu = static_cast<std::size_t>(m);
      if (is_right[mu]) {
        m = map.right_to_left[mu];
      } else if (is_top[mu]) {
        m = map.top_to_bottom[mu];
      } else {
        break;
      }
    }
    map.master_of[v] = m;
    const Vec2 shift(is_right[v] ? -1.0 : 0.0, is_top[v] ? -1.0 : 0.0);
    map.pairs.push_back({static_cast<Index>(v), m, shift});
  }
  return map;
}

double measure(const Mesh& mesh) {
  double total = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) total += mesh.triangle_area(t);
  return total;
}

double hole_perimeter(const Mesh& mesh) {
  double total = 0.0;
  for (const auto& be : mesh.boundary_edges()) {
    if (be.marker == Marker::Hole) total += (mesh.vertices()[be.v[0]] - mesh.vertices()[be.v[1]]).norm();
  }
  return total;
}

MeshCheck check_mesh(const Mesh& mesh) {
  MeshCheck check;
  auto fail = [&](std::string msg) {
    check.ok = false;
    check.problems.push_back(std::move(msg));
  };
  double hmax = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    if (!(mesh.triangle_area(t) > 0.0)) fail("triangle " + std::to_string(t) + " not positive");
    hmax = std::max(hmax, mesh.triangle_diameter(t));
  }
  if (hmax != mesh.h_max()) fail("h_max mismatch");

  std::vector<int> count(static_cast<std::size_t>(mesh.num_edges()), 0);
  for (const auto& te : mesh.triangle_edges()) {
    for (Index e : te) ++count[static_cast<std::size_t>(e)];
  }
  std::unordered_map<std::uint64_t, int> boundary_keys;
  for (const auto& be : mesh.boundary_edges()) ++boundary_keys[edge_key(be.v[0], be.v[1])];
  for (std::size_t e = 0; e < count.size(); ++e) {
    const auto& ed = mesh.edges()[e];
    const bool is_boundary = boundary_keys.count(edge_key(ed[0], ed[1])) > 0;
    if (count[e] == 1 && !is_boundary) fail("open edge not marked as boundary");
    if (count[e] == 2 && is_boundary) fail("interior edge marked as boundary");
    if (count[e] > 2 || count[e] == 0) fail("non-manifold edge");
  }

  std::vector<int> degree(static_cast<std::size_t>(mesh.num_vertices()), 0);
  for (const auto& be : mesh.boundary_edges()) {
    ++degree[static_cast<std::size_t>(be.v[0])];
    ++degree[static_cast<std::size_t>(be.v[1])];
    if (be.marker == Marker::Hole) {
      for (Index v : be.v) {
        const Point& p = mesh.vertices()[v];
        if (!(p.x() > 0.0 && p.x() < 1.0 && p.y() > 0.0 && p.y() < 1.0)) {
          fail("HOLE loop touches the unit square boundary");
        }
      }
    }
  }
  for (std::size_t v = 0; v < degree.size(); ++v) {
    if (degree[v] % 2 != 0) fail("boundary loop open at vertex " + std::to_string(v));
  }
  return check;
}

std::string geometry_hash(const Mesh& mesh) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& v : mesh.vertices()) {
    const double xy[2] = {v.x(), v.y()};
    mix(xy, sizeof(xy));
  }
  for (const auto& t : mesh.triangles()) mix(t.data(), sizeof(Index) * 3);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dispersim
