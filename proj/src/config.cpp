#include "dispersim/config.hpp"

#include "dispersim/errors.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string_view>

namespace dispersim {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_presets();
std::string_view embedded_schema();
}  // namespace detail

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPi = std::numbers::pi;

void allow_keys(const Json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto k : keys) ok = ok || k == key;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

double num(const Json& j, std::string_view where) {
  if (!j.is_number()) throw ConfigError(std::string(where) + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(std::string(where) + ": not finite");
  return v;
}

double num_or(const Json& j, const char* key, double fallback, std::string_view where) {
  return j.contains(key) ? num(j.at(key), std::string(where) + "." + key) : fallback;
}

int integer(const Json& j, std::string_view where) {
  if (!j.is_number_integer()) throw ConfigError(std::string(where) + ": expected an integer");
  return j.get<int>();
}

std::string str(const Json& j, std::string_view where) {
  if (!j.is_string()) throw ConfigError(std::string(where) + ": expected a string");
  return j.get<std::string>();
}

Point point(const Json& j, std::string_view where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(where) + ": expected [x, y]");
  return Point(num(j[0], where), num(j[1], where));
}

std::string type_of(const Json& spec, std::string_view where) {
  if (!spec.is_object() || !spec.contains("type")) {
    throw ConfigError(std::string(where) + ": expected an object with a \"type\"");
  }
  return str(spec.at("type"), std::string(where) + ".type");
}

HoleSpec parse_hole(const Json& j, std::string_view where) {
  const std::string kind = type_of(j, where);
  if (kind == "ellipse") {
    allow_keys(j, where, {"type", "center", "semi_axes"});
    const Point c = point(j.at("center"), std::string(where) + ".center");
    const Point r = point(j.at("semi_axes"), std::string(where) + ".semi_axes");
    if (!(r.x() > 0.0 && r.y() > 0.0)) throw ConfigError(std::string(where) + ": semi axes must be positive");
    return HoleSpec::ellipse(c, r.x(), r.y());
  }
  if (kind == "rectangle") {
    allow_keys(j, where, {"type", "x", "y"});
    const Point x = point(j.at("x"), std::string(where) + ".x");
    const Point y = point(j.at("y"), std::string(where) + ".y");
    if (!(x.y() > x.x() && y.y() > y.x())) throw ConfigError(std::string(where) + ": empty rectangle");
    return HoleSpec::rectangle(x.x(), x.y(), y.x(), y.y());
  }
  throw ConfigError(std::string(where) + ": unknown hole type '" + kind + "'");
}

// JSON merge patch, except that an object carrying a "type" replaces the
// target wholesale: switching a coefficient's type must not inherit the old
// type's parameters.
void merge_config(Json& target, const Json& patch) {
  if (!patch.is_object() || patch.contains("type") || !target.is_object()) {
    target = patch;
    return;
  }
  for (const auto& [key, value] : patch.items()) {
    if (value.is_null()) {
      target.erase(key);
    } else if (target.contains(key)) {
      merge_config(target[key], value);
    } else {
      target[key] = value;
    }
  }
}

Json resolve_base(const Json& j, int depth) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  if (!j.contains("base")) return j;
  if (depth > 8) throw ConfigError("preset base chain too deep");
  const std::string base = str(j.at("base"), "base");
  Json merged = resolve_base(preset_json(base), depth + 1);
  Json patch = j;
  patch.erase("base");
  merge_config(merged, patch);
  return merged;
}

}  // namespace

RunConfig parse_config(const Json& input) {
  const Json j = resolve_base(input, 0);
  allow_keys(j, "config",
             {"name", "description", "macro", "cell", "stokes", "diffusion", "coupling", "source",
              "initial", "boundary", "time", "scheme", "tensor_mode", "picard", "table", "jobs",
              "study"});
  RunConfig cfg;
  cfg.raw = j;
  if (j.contains("name")) cfg.name = str(j.at("name"), "name");

  if (!j.contains("macro")) throw ConfigError("config: missing \"macro\"");
  {
    const Json& m = j.at("macro");
    allow_keys(m, "macro", {"x", "y", "nx", "ny", "load_refine"});
    const Point x = point(m.at("x"), "macro.x");
    const Point y = point(m.at("y"), "macro.y");
    cfg.macro = RectSpec{x.x(), x.y(), y.x(), y.y(), integer(m.at("nx"), "macro.nx"), integer(m.at("ny"), "macro.ny")};
    if (cfg.macro.nx < 1 || cfg.macro.ny < 1) throw ConfigError("macro: nx and ny must be >= 1");
    if (!(cfg.macro.x1 > cfg.macro.x0 && cfg.macro.y1 > cfg.macro.y0)) throw ConfigError("macro: empty domain");
    if (m.contains("load_refine")) cfg.load_refine = integer(m.at("load_refine"), "macro.load_refine");
    if (cfg.load_refine < 0 || cfg.load_refine > 6) throw ConfigError("macro.load_refine must be in [0, 6]");
  }

  if (!j.contains("cell")) throw ConfigError("config: missing \"cell\"");
  {
    const Json& c = j.at("cell");
    allow_keys(c, "cell", {"n", "holes", "mesh_file"});
    if (c.contains("n")) cfg.cell.n = integer(c.at("n"), "cell.n");
    if (cfg.cell.n < 2) throw ConfigError("cell.n must be >= 2");
    if (c.contains("holes")) {
      if (!c.at("holes").is_array()) throw ConfigError("cell.holes: expected an array");
      for (std::size_t i = 0; i < c.at("holes").size(); ++i) {
        cfg.cell.holes.push_back(parse_hole(c.at("holes")[i], "cell.holes[" + std::to_string(i) + "]"));
      }
    }
    if (c.contains("mesh_file")) cfg.cell.mesh_file = str(c.at("mesh_file"), "cell.mesh_file");
  }

  if (!j.contains("stokes")) throw ConfigError("config: missing \"stokes\"");
  {
    const Json& s = j.at("stokes");
    allow_keys(s, "stokes", {"mu", "force"});
    cfg.mu = num(s.at("mu"), "stokes.mu");
    if (!(cfg.mu > 0.0)) throw ConfigError("stokes.mu must be positive");
    cfg.force = s.at("force");
    make_force(cfg.force);
  }

  if (!j.contains("diffusion")) throw ConfigError("config: missing \"diffusion\"");
  cfg.diffusion = j.at("diffusion");
  make_diffusion(cfg.diffusion);

  if (j.contains("coupling")) cfg.coupling = str(j.at("coupling"), "coupling");
  drift_interaction(cfg.coupling);

  cfg.source = j.value("source", Json{{"type", "zero"}});
  make_source(cfg.source);
  cfg.initial = j.value("initial", Json{{"type", "zero"}});
  make_initial(cfg.initial);
  cfg.boundary = j.value("boundary", Json::array());
  make_dirichlet(cfg.boundary);

  if (!j.contains("time")) throw ConfigError("config: missing \"time\"");
  {
    const Json& t = j.at("time");
    allow_keys(t, "time", {"T", "M"});
    cfg.t_final = num(t.at("T"), "time.T");
    cfg.steps = integer(t.at("M"), "time.M");
    if (!(cfg.t_final > 0.0)) throw ConfigError("time.T must be positive");
    if (cfg.steps < 1) throw ConfigError("time.M must be at least 1");
  }

  if (j.contains("scheme")) cfg.scheme = parse_scheme(str(j.at("scheme"), "scheme"));
  if (j.contains("tensor_mode")) cfg.mode = parse_tensor_mode(str(j.at("tensor_mode"), "tensor_mode"));

  if (j.contains("picard")) {
    const Json& p = j.at("picard");
    allow_keys(p, "picard", {"tol", "max_iter"});
    cfg.tol = num_or(p, "tol", cfg.tol, "picard");
    if (p.contains("max_iter")) cfg.max_iter = integer(p.at("max_iter"), "picard.max_iter");
    if (!(cfg.tol > 0.0)) throw ConfigError("picard.tol must be positive");
    if (cfg.max_iter < 1) throw ConfigError("picard.max_iter must be at least 1");
  }

  if (j.contains("table")) {
    const Json& t = j.at("table");
    allow_keys(t, "table", {"inner_count", "inner_half_width", "outer_per_sign", "outer_max", "file"});
    if (t.contains("inner_count")) cfg.knots.inner_count = integer(t.at("inner_count"), "table.inner_count");
    cfg.knots.inner_half_width = num_or(t, "inner_half_width", cfg.knots.inner_half_width, "table");
    if (t.contains("outer_per_sign")) cfg.knots.outer_per_sign = integer(t.at("outer_per_sign"), "table.outer_per_sign");
    cfg.knots.outer_max = num_or(t, "outer_max", cfg.knots.outer_max, "table");
    if (t.contains("file")) cfg.table_file = str(t.at("file"), "table.file");
    make_p_grid(cfg.knots);
  }

  if (j.contains("jobs")) cfg.jobs = integer(j.at("jobs"), "jobs");
  if (cfg.jobs < 1) throw ConfigError("jobs must be at least 1");

  if (j.contains("study")) {
    const Json& s = j.at("study");
    allow_keys(s, "study", {"axis", "levels"});
    cfg.study.axis = str(s.at("axis"), "study.axis");
    if (cfg.study.axis != "space" && cfg.study.axis != "time" && cfg.study.axis != "joint") {
      throw ConfigError("study.axis must be space, time or joint");
    }
    if (!s.at("levels").is_array()) throw ConfigError("study.levels: expected an array");
    for (const auto& level : s.at("levels")) {
      if (!level.is_object()) throw ConfigError("study.levels: each level is an object patch");
      cfg.study.levels.push_back(level);
    }
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

RunConfig load_preset(const std::string& name) { return parse_config(preset_json(name)); }

RunConfig with_patch(const RunConfig& cfg, const Json& patch) {
  Json j = cfg.raw;
  merge_config(j, patch);
  return parse_config(j);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : detail::embedded_presets()) names.emplace_back(name);
  return names;
}

const Json& preset_json(const std::string& name) {
  static const std::map<std::string, Json> parsed = [] {
    std::map<std::string, Json> m;
    for (const auto& [n, text] : detail::embedded_presets()) m.emplace(std::string(n), Json::parse(text));
    return m;
  }();
  const auto it = parsed.find(name);
  if (it == parsed.end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

const Json& config_schema() {
  static const Json schema = Json::parse(detail::embedded_schema());
  return schema;
}

// ---------------------------------------------------------------------------

VectorCoefficient make_force(const Json& spec) {
  const std::string type = type_of(spec, "force");
  if (type == "zero") {
    allow_keys(spec, "force", {"type"});
    return VectorCoefficient::uniform(Vec2::Zero(), "zero");
  }
  if (type == "constant") {
    allow_keys(spec, "force", {"type", "value"});
    return VectorCoefficient::uniform(point(spec.at("value"), "force.value"), "constant");
  }
  if (type == "trig-product") {
    // a (sin(2 pi k y1) sin(2 pi k y2), sin(2 pi k y1) cos(2 pi k y2))
    allow_keys(spec, "force", {"type", "amplitude", "frequency"});
    const double a = num(spec.at("amplitude"), "force.amplitude");
    const double k = num_or(spec, "frequency", 1.0, "force");
    return VectorCoefficient{[a, k](const Point& y) {
                               const double s1 = std::sin(kTwoPi * k * y.x());
                               return Vec2(a * s1 * std::sin(kTwoPi * k * y.y()),
                                           a * s1 * std::cos(kTwoPi * k * y.y()));
                             },
                             false, "trig-product"};
  }
  if (type == "gradient-sine") {
    // grad of a sin(2 pi k y1)
    allow_keys(spec, "force", {"type", "amplitude", "frequency"});
    const double a = num(spec.at("amplitude"), "force.amplitude");
    const double k = num_or(spec, "frequency", 1.0, "force");
    return VectorCoefficient{[a, k](const Point& y) {
                               return Vec2(a * kTwoPi * k * std::cos(kTwoPi * k * y.x()), 0.0);
                             },
                             false, "gradient-sine"};
  }
  throw ConfigError("force: unknown type '" + type + "'");
}

MatrixCoefficient make_diffusion(const Json& spec) {
  const std::string type = type_of(spec, "diffusion");
  if (type == "constant") {
    allow_keys(spec, "diffusion", {"type", "matrix"});
    const Json& m = spec.at("matrix");
    if (!m.is_array() || m.size() != 2) throw ConfigError("diffusion.matrix: expected [[a, b], [c, d]]");
    const Point r0 = point(m[0], "diffusion.matrix[0]");
    const Point r1 = point(m[1], "diffusion.matrix[1]");
    Mat2 d;
    d << r0.x(), r0.y(), r1.x(), r1.y();
    return MatrixCoefficient::uniform(d, "constant");
  }
  if (type == "sine-diagonal") {
    // diag(base + sin(pi y1) sin(pi y2), base + sin(pi y1))
    allow_keys(spec, "diffusion", {"type", "base"});
    const double base = num(spec.at("base"), "diffusion.base");
    return MatrixCoefficient{[base](const Point& y) {
                               const double s1 = std::sin(kPi * y.x());
                               Mat2 d = Mat2::Zero();
                               d(0, 0) = base + s1 * std::sin(kPi * y.y());
                               d(1, 1) = base + s1;
                               return d;
                             },
                             false, "sine-diagonal"};
  }
  throw ConfigError("diffusion: unknown type '" + type + "'");
}

SpaceTimeFunction make_source(const Json& spec) {
  const std::string type = type_of(spec, "source");
  if (type == "zero") {
    allow_keys(spec, "source", {"type"});
    return SpaceTimeFunction{[](double, const Point&) { return 0.0; }, true, "zero"};
  }
  if (type == "constant") {
    allow_keys(spec, "source", {"type", "value"});
    const double v = num(spec.at("value"), "source.value");
    return SpaceTimeFunction{[v](double, const Point&) { return v; }, true, "constant"};
  }
  if (type == "disk") {
    allow_keys(spec, "source", {"type", "center", "radius", "value"});
    const Point c = point(spec.at("center"), "source.center");
    const double r = num(spec.at("radius"), "source.radius");
    const double v = num(spec.at("value"), "source.value");
    return SpaceTimeFunction{[c, r, v](double, const Point& x) { return (x - c).squaredNorm() <= r * r ? v : 0.0; },
                             true, "disk"};
  }
  throw ConfigError("source: unknown type '" + type + "'");
}

ScalarCoefficient make_initial(const Json& spec) {
  const std::string type = type_of(spec, "initial");
  if (type == "zero") {
    allow_keys(spec, "initial", {"type"});
    return ScalarCoefficient::uniform(0.0, "zero");
  }
  if (type == "constant") {
    allow_keys(spec, "initial", {"type", "value"});
    return ScalarCoefficient::uniform(num(spec.at("value"), "initial.value"), "constant");
  }
  if (type == "gaussian-disk") {
    // amplitude exp(-rate |x - c|^2) inside the disk, 0 outside
    allow_keys(spec, "initial", {"type", "center", "radius", "amplitude", "rate"});
    const Point c = point(spec.at("center"), "initial.center");
    const double r = num(spec.at("radius"), "initial.radius");
    const double a = num_or(spec, "amplitude", 1.0, "initial");
    const double k = num(spec.at("rate"), "initial.rate");
    return ScalarCoefficient{[c, r, a, k](const Point& x) {
                               const double d2 = (x - c).squaredNorm();
                               return d2 <= r * r ? a * std::exp(-k * d2) : 0.0;
                             },
                             false, "gaussian-disk"};
  }
  if (type == "sine-product") {
    allow_keys(spec, "initial", {"type", "amplitude"});
    const double a = num_or(spec, "amplitude", 1.0, "initial");
    return ScalarCoefficient{[a](const Point& x) { return a * std::sin(kPi * x.x()) * std::sin(kPi * x.y()); },
                             false, "sine-product"};
  }
  throw ConfigError("initial: unknown type '" + type + "'");
}

SpaceTimeFunction make_boundary_value(const Json& spec) {
  const std::string type = type_of(spec, "boundary value");
  if (type == "constant") {
    const double v = num(spec.at("value"), "boundary.value");
    return SpaceTimeFunction{[v](double, const Point&) { return v; }, true, "constant"};
  }
  if (type == "saturating-ramp") {
    // amplitude t / (1 + t)
    const double a = num(spec.at("amplitude"), "boundary.amplitude");
    return SpaceTimeFunction{[a](double t, const Point&) { return a * t / (1.0 + t); }, false,
                             "saturating-ramp"};
  }
  throw ConfigError("boundary: unknown type '" + type + "'");
}

DirichletSpec make_dirichlet(const Json& pieces) {
  if (!pieces.is_array()) throw ConfigError("boundary: expected an array of pieces");
  DirichletSpec bc;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Json& p = pieces[i];
    const std::string where = "boundary[" + std::to_string(i) + "]";
    allow_keys(p, where, {"marker", "type", "value", "amplitude"});
    Marker m;
    try {
      m = parse_marker(str(p.at("marker"), where + ".marker"));
    } catch (const IoError& e) {
      throw ConfigError(where + ": " + e.what());
    }
    if (m == Marker::Hole) throw ConfigError(where + ": macro boundary pieces take outer markers");
    bc.pieces.push_back({m, make_boundary_value(p)});
  }
  return bc;
}

std::string offline_key(const RunConfig& cfg) {
  const Json& r = cfg.raw;
  Json key = {{"cell", r.at("cell")}, {"stokes", r.at("stokes")}, {"diffusion", r.at("diffusion")}};
  Json knots = {{"inner_count", cfg.knots.inner_count},
                {"inner_half_width", cfg.knots.inner_half_width},
                {"outer_per_sign", cfg.knots.outer_per_sign},
                {"outer_max", cfg.knots.outer_max},
                {"file", cfg.table_file}};
  key["knots"] = knots;
  return key.dump();
}

}  // namespace dispersim
