#pragma once

#include "dispersim/disptable.hpp"
#include "dispersim/mesh.hpp"
#include "dispersim/schemes.hpp"
#include "dispersim/types.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace dispersim {

using Json = nlohmann::json;

struct RectSpec {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int nx = 8, ny = 8;
};

struct CellSpec {
  int n = 64;
  std::vector<HoleSpec> holes;
  /// Optional mesh2d file replacing the generated cell mesh.
  std::string mesh_file;
};

struct StudySpec {
  std::string axis;  // space | time | joint, empty when no study is configured
  /// Each level is a patch applied to the run configuration (see with_patch).
  std::vector<Json> levels;
};

/// Parsed run configuration. Coefficient functions stay as their JSON
/// descriptions and are instantiated by the make_* helpers below.
struct RunConfig {
  std::string name;
  RectSpec macro;
  int load_refine = 0;
  CellSpec cell;
  double mu = 1.0;
  Json force;
  Json diffusion;
  std::string coupling = "one-minus-two-u";
  Json source;
  Json initial;
  Json boundary = Json::array();
  double t_final = 1.0;
  int steps = 1;
  SchemeKind scheme = SchemeKind::TimeStep;
  TensorMode mode = TensorMode::Precomputed;
  double tol = 1e-7;
  int max_iter = 10;
  KnotSpec knots;
  std::string table_file;
  int jobs = 1;
  StudySpec study;

  /// The fully merged JSON this config was parsed from.
  Json raw;
};

/// Parses a configuration object. A "base" key names a preset that the rest
/// of the object is merge-patched onto.
RunConfig parse_config(const Json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);
RunConfig load_preset(const std::string& name);
/// `patch` merge-patched onto `cfg.raw`, then re-parsed. Unlike a plain JSON
/// merge patch, an object with a "type" key replaces its target instead of
/// merging into it. The same rule applies to "base".
RunConfig with_patch(const RunConfig& cfg, const Json& patch);

std::vector<std::string> preset_names();
const Json& preset_json(const std::string& name);
/// JSON schema describing the configuration format.
const Json& config_schema();

VectorCoefficient make_force(const Json& spec);
MatrixCoefficient make_diffusion(const Json& spec);
SpaceTimeFunction make_source(const Json& spec);
ScalarCoefficient make_initial(const Json& spec);
SpaceTimeFunction make_boundary_value(const Json& spec);
DirichletSpec make_dirichlet(const Json& pieces);

/// Stable text identifying everything the offline phase depends on.
std::string offline_key(const RunConfig& cfg);

}  // namespace dispersim
