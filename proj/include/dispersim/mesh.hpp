#pragma once

#include "dispersim/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dispersim {

enum class Marker : std::uint8_t { OuterLeft, OuterRight, OuterBottom, OuterTop, Hole };

std::string_view marker_name(Marker m);
Marker parse_marker(std::string_view name);
bool is_outer(Marker m);

struct BoundaryEdge {
  std::array<Index, 2> v;
  Marker marker;
};

/// Conforming triangulation with boundary classification.
///
/// Construction validates orientation and edge manifoldness and derives the
/// unique edge list used by P2 elements. Local edge k of a triangle joins its
/// vertices k and (k + 1) % 3. The object is immutable afterwards.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Point> vertices, std::vector<std::array<Index, 3>> triangles,
       std::vector<BoundaryEdge> boundary_edges);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<Index, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  const std::vector<std::array<Index, 2>>& edges() const { return edges_; }
  const std::vector<std::array<Index, 3>>& triangle_edges() const { return triangle_edges_; }

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_triangles() const { return static_cast<Index>(triangles_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  double h_max() const { return h_max_; }

  double triangle_area(Index t) const;
  double triangle_diameter(Index t) const;

  /// Vertices touched by a boundary edge with the given marker, sorted.
  std::vector<Index> vertices_with_marker(Marker m) const;
  /// Vertices on any boundary edge, sorted.
  std::vector<Index> boundary_vertices() const;
  /// Edge ids (into edges()) carrying the given marker, sorted.
  std::vector<Index> edges_with_marker(Marker m) const;
  bool has_marker(Marker m) const;

 private:
  std::vector<Point> vertices_;
  std::vector<std::array<Index, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<std::array<Index, 2>> edges_;
  std::vector<std::array<Index, 3>> triangle_edges_;
  std::vector<std::int8_t> edge_marker_;  // -1 for interior edges
  double h_max_ = 0.0;
};

struct HoleSpec {
  enum class Kind { Ellipse, Rectangle };
  Kind kind = Kind::Ellipse;
  Point center{0.5, 0.5};
  /// Semi-axes (ellipse) or half-extents (rectangle) along y1 and y2.
  Vec2 half_size{0.1, 0.1};

  static HoleSpec ellipse(Point center, double r1, double r2);
  /// Axis-aligned rectangle [x0, x1] x [y0, y1].
  static HoleSpec rectangle(double x0, double x1, double y0, double y1);

  /// Closed-set membership.
  bool contains(const Point& y) const;
  /// Closest point on the hole boundary curve.
  Point project_to_boundary(const Point& y) const;
  double area() const;
  /// Boundary length; ellipse arc length by composite Gauss-Legendre quadrature.
  double perimeter() const;
};

/// Slave -> master identification of the outer boundary of the unit cell.
struct PeriodicMap {
  struct Pair {
    Index slave;
    Index master;
    Vec2 shift;  // master coordinate = slave coordinate + shift
  };
  std::vector<Pair> pairs;
  /// master_of[v] == v for every vertex that is not a slave.
  std::vector<Index> master_of;
  /// Direct partner on the opposite side, before corner resolution (-1 if none).
  std::vector<Index> right_to_left;
  std::vector<Index> top_to_bottom;

  bool is_slave(Index v) const { return master_of[static_cast<std::size_t>(v)] != v; }
  std::size_t num_slaves() const { return pairs.size(); }
};

struct CellMesh {
  Mesh mesh;
  PeriodicMap periodic;
};

/// Uniform triangulation of [x0,x1] x [y0,y1] with 2*nx*ny triangles, each
/// grid cell split along its (x0,y0)-(x1,y1) diagonal.
Mesh build_rect_mesh(std::pair<double, double> x_extent, std::pair<double, double> y_extent,
                     int nx, int ny);

/// Perforated unit cell: uniform n x n grid with triangles whose barycenter is
/// inside a hole removed, exposed vertices snapped to the analytic hole
/// boundary where the 10 degree minimum-angle guard allows it.
CellMesh build_cell_mesh(std::span<const HoleSpec> holes, int n);

/// Periodic map for any mesh of the unit square whose opposite sides carry
/// matching vertex coordinates.
PeriodicMap build_periodic_map(const Mesh& mesh, double tol = 1e-12);

/// Sum of triangle areas.
double measure(const Mesh& mesh);

/// Total length of HOLE boundary edges.
double hole_perimeter(const Mesh& mesh);

struct MeshCheck {
  bool ok = true;
  std::vector<std::string> problems;
};

/// Re-checks the Mesh invariants: positive areas, manifold edges, closed
/// boundary loops, HOLE loops strictly inside the unit square, h_max.
MeshCheck check_mesh(const Mesh& mesh);

/// FNV-1a hash of vertex coordinates and connectivity, as 16 hex digits.
std::string geometry_hash(const Mesh& mesh);

// ASCII exchange format: `mesh2d <nv> <nt> <ne>` then `v x y`, `t i j k`,
// `e i j MARKER` lines with 0-based indices.
void write_mesh2d(std::ostream& out, const Mesh& mesh);
Mesh read_mesh2d(std::istream& in);
void write_mesh2d_file(const std::string& path, const Mesh& mesh);
Mesh read_mesh2d_file(const std::string& path);

/// Legacy-VTK ASCII unstructured grid with optional point scalars.
void write_vtk(std::ostream& out, const Mesh& mesh,
               std::span<const std::pair<std::string, std::span<const double>>> point_data = {});

}  // namespace dispersim
