#include "dispersim/commands.hpp"

#include "dispersim/config.hpp"
#include "dispersim/errors.hpp"
#include "dispersim/experiment.hpp"
#include "dispersim/study.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace dispersim {

namespace {

namespace fs = std::filesystem;

RunConfig load(const CommandOptions& opt) {
  if (opt.config_path.empty() && opt.preset.empty()) {
    throw ConfigError("pass --config <path> or --preset <name>");
  }
  if (opt.config_path.empty()) return load_preset(opt.preset);
  if (opt.preset.empty()) return load_config_file(opt.config_path);
  std::ifstream in(opt.config_path);
  if (!in) throw ConfigError("cannot open config '" + opt.config_path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(opt.config_path + ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(opt.config_path + ": configuration must be a JSON object");
  if (!j.contains("base")) j["base"] = opt.preset;
  return parse_config(j);
}

fs::path out_dir(const CommandOptions& opt) {
  fs::path dir(opt.out_dir.empty() ? "." : opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

int jobs_for(const CommandOptions& opt, const RunConfig& cfg) { return opt.jobs > 0 ? opt.jobs : cfg.jobs; }

std::vector<double> parse_knots(const std::string& text) {
  std::vector<double> knots;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      knots.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--knots: bad number '" + item + "'");
    }
  }
  if (knots.empty()) throw ConfigError("--knots: empty list");
  std::sort(knots.begin(), knots.end());
  if (std::adjacent_find(knots.begin(), knots.end()) != knots.end()) throw ConfigError("--knots: duplicate knot");
  return knots;
}

}  // namespace

int cmd_stokes(const CommandOptions& opt, std::ostream& log) {
  const RunConfig cfg = load(opt);
  const fs::path dir = out_dir(opt);
  const auto t0 = std::chrono::steady_clock::now();
  const auto cell = build_cell(cfg.cell);
  const DriftField drift = solve_stokes(cell, cfg.mu, make_force(cfg.force));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const DriftReport report = verify_drift(drift);

  auto csv = open_out(dir / "drift.csv");
  write_drift_csv(csv, drift);
  const auto nv = static_cast<Eigen::Index>(cell->mesh.num_vertices());
  const Eigen::VectorXd b1 = drift.b1.head(nv);
  const Eigen::VectorXd b2 = drift.b2.head(nv);
  const std::vector<std::pair<std::string, std::span<const double>>> fields = {
      {"B1", {b1.data(), static_cast<std::size_t>(nv)}},
      {"B2", {b2.data(), static_cast<std::size_t>(nv)}},
      {"pressure", {drift.pressure.data(), static_cast<std::size_t>(drift.pressure.size())}}};
  auto vtk = open_out(dir / "drift.vtk");
  write_vtk(vtk, cell->mesh, fields);

  auto rep = open_out(dir / "stokes_report.csv");
  rep << "quantity,value\n";
  rep << "velocity_dofs," << 2 * drift.velocity_dofs.num_dofs() << '\n';
  rep << "pressure_dofs," << drift.pressure_dofs.num_dofs() << '\n';
  rep << "max_wall_velocity," << g17(report.max_wall_velocity) << '\n';
  rep << "max_divergence," << g17(report.max_divergence) << '\n';
  rep << "periodicity_mismatch," << g17(report.periodicity_mismatch) << '\n';
  rep << "solve_residual," << g17(drift.solve_residual) << '\n';
  rep << "seconds," << g17(seconds) << '\n';
  rep << "pass," << (report.pass ? 1 : 0) << '\n';

  log << "stokes: " << cell->mesh.num_vertices() << " cell vertices, " << 2 * drift.velocity_dofs.num_dofs()
      << " velocity dofs, " << seconds << " s\n";
  log << "stokes: " << report.summary() << '\n';
  return report.pass ? 0 : 1;
}

int cmd_table(const CommandOptions& opt, std::ostream& log) {
  const RunConfig cfg = load(opt);
  const fs::path dir = out_dir(opt);
  const int jobs = jobs_for(opt, cfg);
  auto offline = prepare_offline(cfg, OfflineOptions{false, opt.force, jobs});
  const std::vector<double> knots = opt.knots.empty() ? make_p_grid(cfg.knots) : parse_knots(opt.knots);

  TableMetadata meta;
  meta.items["mu"] = g17(cfg.mu);
  meta.items["force"] = make_force(cfg.force).name;
  meta.items["diffusion"] = make_diffusion(cfg.diffusion).name;
  meta.items["outer_spacing"] = opt.knots.empty() ? "log" : "custom";
  const auto t0 = std::chrono::steady_clock::now();
  const DispersionTable table = build_table(*offline->ctx, knots, jobs, meta);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_table_file((dir / "table.csv").string(), table);
  log << "table: " << table.size() << " knots, " << offline->ctx->dofs().num_dofs() << " cell dofs, "
      << seconds << " s with " << jobs << " worker(s); geometry " << table.metadata().geometry_hash << '\n';
  return 0;
}

int cmd_solve(const CommandOptions& opt, std::ostream& log) {
  RunConfig cfg = load(opt);
  if (!opt.scheme.empty()) cfg = with_patch(cfg, Json{{"scheme", opt.scheme}});
  if (!opt.mode.empty()) cfg = with_patch(cfg, Json{{"tensor_mode", opt.mode}});
  const fs::path dir = out_dir(opt);
  RunOutput run = run_experiment(cfg, nullptr, std::nullopt, jobs_for(opt, cfg), opt.force);
  const auto& traj = run.result.trajectory;
  const MacroProblem& pb = *run.problem;
  const double dt = cfg.t_final / cfg.steps;

  {
    auto f = open_out(dir / "norms.csv");
    f << "n,t,l2,max_abs\n";
    for (std::size_t n = 0; n < traj.states.size(); ++n) {
      f << n << ',' << g17(traj.times[n]) << ',' << g17(l2_space(pb.mass(), traj.states[n])) << ','
        << g17(traj.states[n].lpNorm<Eigen::Infinity>()) << '\n';
    }
  }
  if (cfg.scheme == SchemeKind::Picard) {
    auto f = open_out(dir / "iterations.csv");
    f << "k,error,ratio\n";
    const auto& lg = run.result.log;
    for (std::size_t k = 0; k < lg.errors.size(); ++k) {
      f << k << ',' << g17(lg.errors[k]) << ',' << (k > 0 ? g17(lg.ratios[k - 1]) : std::string()) << '\n';
    }
  }
  {
    auto f = open_out(dir / "timings.csv");
    const auto& t = run.result.timings;
    f << "phase,stage,seconds\n";
    f << "offline,stokes," << g17(t.stokes) << '\n';
    f << "offline,table," << g17(t.table) << '\n';
    f << "online,macro," << g17(t.online) << '\n';
  }
  {
    auto f = open_out(dir / "final_field.csv");
    write_field_csv(f, pb.mesh(), traj.states.back());
    auto v = open_out(dir / "final_field.vtk");
    const std::vector<std::pair<std::string, std::span<const double>>> fields = {
        {"u", {traj.states.back().data(), static_cast<std::size_t>(traj.states.back().size())}}};
    write_vtk(v, pb.mesh(), fields);
  }
  double max_u = 0.0;
  for (const auto& s : traj.states) max_u = std::max(max_u, s.lpNorm<Eigen::Infinity>());
  const double bound = pb.sup_initial() + cfg.t_final * pb.sup_source(0.0);
  {
    auto f = open_out(dir / "summary.csv");
    f << "quantity,value\n";
    f << "scheme," << scheme_name(cfg.scheme) << '\n';
    f << "tensor_mode," << tensor_mode_name(cfg.mode) << '\n';
    f << "macro_dofs," << pb.size() << '\n';
    f << "micro_dofs," << run.offline->ctx->dofs().num_dofs() << '\n';
    f << "M," << cfg.steps << '\n';
    f << "dt," << g17(dt) << '\n';
    f << "l2_space_time," << g17(l2_space_time(pb.mass(), traj.states, dt)) << '\n';
    f << "max_abs_u," << g17(max_u) << '\n';
    f << "sup_bound," << g17(bound) << '\n';
    f << "cell_solves," << run.result.timings.cell_solves << '\n';
    if (cfg.scheme == SchemeKind::Picard) {
      f << "iterations," << run.result.log.iterations << '\n';
      f << "converged," << (run.result.log.converged ? 1 : 0) << '\n';
    }
  }

  log << "solve: " << scheme_name(cfg.scheme) << '/' << tensor_mode_name(cfg.mode) << ", " << pb.size()
      << " macro dofs, M=" << cfg.steps << ", online " << run.result.timings.online << " s, offline "
      << run.result.timings.stokes + run.result.timings.table << " s\n";
  if (cfg.scheme == SchemeKind::Picard) {
    const auto& lg = run.result.log;
    for (std::size_t k = 0; k < lg.errors.size(); ++k) log << "  e^" << k << " = " << g17(lg.errors[k]) << '\n';
    log << "  " << (lg.converged ? "converged" : "not converged") << " after " << lg.iterations << " iterations\n";
  }
  return 0;
}

int cmd_converge(const CommandOptions& opt, std::ostream& log) {
  const RunConfig cfg = load(opt);
  const fs::path dir = out_dir(opt);
  const StudyResult study =
      run_study(cfg, opt.axis, jobs_for(opt, cfg), [&log](const std::string& msg) { log << "converge: " << msg << '\n'; });
  auto f = open_out(dir / "convergence.csv");
  write_study_csv(f, study);
  auto fit = open_out(dir / "convergence_fit.csv");
  fit << "axis,slope\n" << study.axis << ',' << g17(study.slope) << '\n';
  log << "converge: " << study.axis << " slope " << study.slope << '\n';
  return 0;
}

int cmd_mesh_export(const CommandOptions& opt, std::ostream& log) {
  const RunConfig cfg = load(opt);
  const fs::path dir = out_dir(opt);
  if (opt.which != "macro" && opt.which != "cell" && opt.which != "both") {
    throw ConfigError("mesh-export: --which must be macro, cell or both");
  }
  auto export_mesh = [&](const Mesh& mesh, const std::string& stem) {
    write_mesh2d_file((dir / (stem + ".mesh2d")).string(), mesh);
    auto v = open_out(dir / (stem + ".vtk"));
    write_vtk(v, mesh);
    log << "mesh-export: " << stem << ": " << mesh.num_vertices() << " vertices, " << mesh.num_triangles()
        << " triangles, h_max " << mesh.h_max() << ", geometry " << geometry_hash(mesh) << '\n';
  };
  if (opt.which != "cell") export_mesh(build_macro_mesh(cfg), "macro");
  if (opt.which != "macro") export_mesh(build_cell(cfg.cell)->mesh, "cell");
  return 0;
}

int run_command(const std::string& name, const CommandOptions& opt, std::ostream& log, std::ostream& err) {
  try {
    if (name == "stokes") return cmd_stokes(opt, log);
    if (name == "table") return cmd_table(opt, log);
    if (name == "solve") return cmd_solve(opt, log);
    if (name == "converge") return cmd_converge(opt, log);
    if (name == "mesh-export") return cmd_mesh_export(opt, log);
    err << "error: unknown command '" << name << "'\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace dispersim
