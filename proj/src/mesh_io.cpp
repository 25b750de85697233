#include "dispersim/errors.hpp"
#include "dispersim/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dispersim {

namespace {

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Next non-empty, non-comment line.
bool next_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

[[noreturn]] void parse_error(int lineno, const std::string& what) {
  throw IoError("mesh2d line " + std::to_string(lineno) + ": " + what);
}

}  // namespace

void write_mesh2d(std::ostream& out, const Mesh& mesh) {
  out << "mesh2d " << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' '
      << mesh.boundary_edges().size() << '\n';
  for (const auto& v : mesh.vertices()) out << "v " << fmt17(v.x()) << ' ' << fmt17(v.y()) << '\n';
  for (const auto& t : mesh.triangles()) out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges()) {
    out << "e " << e.v[0] << ' ' << e.v[1] << ' ' << marker_name(e.marker) << '\n';
  }
  if (!out) throw IoError("failed writing mesh2d stream");
}

Mesh read_mesh2d(std::istream& in) {
  std::string line;
  int lineno = 0;
  if (!next_line(in, line, lineno)) throw IoError("mesh2d: empty input");
  std::istringstream header(line);
  std::string tag;
  long long nv = -1, nt = -1, ne = -1;
  header >> tag >> nv >> nt >> ne;
  if (tag != "mesh2d" || !header || nv < 0 || nt < 0 || ne < 0) parse_error(lineno, "bad header");

  std::vector<Point> vertices;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<BoundaryEdge> edges;
  vertices.reserve(static_cast<std::size_t>(nv));
  triangles.reserve(static_cast<std::size_t>(nt));
  edges.reserve(static_cast<std::size_t>(ne));

  while (next_line(in, line, lineno)) {
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "v") {
      double x, y;
      if (!(ls >> x >> y)) parse_error(lineno, "bad vertex");
      vertices.emplace_back(x, y);
    } else if (tag == "t") {
      long long a, b, c;
      if (!(ls >> a >> b >> c)) parse_error(lineno, "bad triangle");
      for (long long i : {a, b, c}) {
        if (i < 0 || i >= nv) parse_error(lineno, "triangle index out of range");
      }
      triangles.push_back({static_cast<Index>(a), static_cast<Index>(b), static_cast<Index>(c)});
    } else if (tag == "e") {
      long long a, b;
      std::string marker;
      if (!(ls >> a >> b >> marker)) parse_error(lineno, "bad boundary edge");
      if (a < 0 || a >= nv || b < 0 || b >= nv) parse_error(lineno, "edge index out of range");
      edges.push_back({{static_cast<Index>(a), static_cast<Index>(b)}, parse_marker(marker)});
    } else {
      parse_error(lineno, "unknown record '" + tag + "'");
    }
  }
  if (static_cast<long long>(vertices.size()) != nv ||
      static_cast<long long>(triangles.size()) != nt ||
      static_cast<long long>(edges.size()) != ne) {
    throw IoError("mesh2d: record counts do not match header");
  }
  return Mesh(std::move(vertices), std::move(triangles), std::move(edges));
}

void write_mesh2d_file(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_mesh2d(out, mesh);
}

Mesh read_mesh2d_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_mesh2d(in);
}

void write_vtk(std::ostream& out, const Mesh& mesh,
               std::span<const std::pair<std::string, std::span<const double>>> point_data) {
  out << "# vtk DataFile Version 3.0\n";
  out << "dispersim mesh\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices()) out << fmt17(v.x()) << ' ' << fmt17(v.y()) << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (Index t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
  if (!point_data.empty()) {
    out << "POINT_DATA " << mesh.num_vertices() << '\n';
    for (const auto& [name, values] : point_data) {
      if (static_cast<Index>(values.size()) != mesh.num_vertices()) {
        throw ContractViolation("point data '" + name + "' has wrong length");
      }
      out << "SCALARS " << name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (double x : values) out << fmt17(x) << '\n';
    }
  }
  if (!out) throw IoError("failed writing VTK stream");
}

}  // namespace dispersim
