#include "dispersim/experiment.hpp"

#include "dispersim/errors.hpp"

#include <chrono>
#include <sstream>

namespace dispersim {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::shared_ptr<const CellMesh> build_cell(const CellSpec& spec) {
  if (!spec.mesh_file.empty()) {
    Mesh mesh = read_mesh2d_file(spec.mesh_file);
    PeriodicMap periodic = build_periodic_map(mesh);
    return std::make_shared<const CellMesh>(CellMesh{std::move(mesh), std::move(periodic)});
  }
  return std::make_shared<const CellMesh>(build_cell_mesh(spec.holes, spec.n));
}

namespace {

void ensure_table(OfflineData& data, const RunConfig& cfg, const OfflineOptions& opt) {
  if (data.table) return;
  const auto t0 = std::chrono::steady_clock::now();
  if (!cfg.table_file.empty()) {
    data.table = std::make_shared<const DispersionTable>(
        read_table_file(cfg.table_file, data.ctx->geometry_hash(), opt.force));
  } else {
    TableMetadata meta;
    std::ostringstream mu;
    mu.precision(17);
    mu << cfg.mu;
    meta.items["mu"] = mu.str();
    meta.items["force"] = make_force(cfg.force).name;
    meta.items["diffusion"] = make_diffusion(cfg.diffusion).name;
    meta.items["outer_spacing"] = "log";
    const auto knots = make_p_grid(cfg.knots);
    data.table = std::make_shared<const DispersionTable>(
        build_table(*data.ctx, knots, opt.jobs, std::move(meta)));
  }
  data.table_seconds = seconds_since(t0);
}

}  // namespace

std::shared_ptr<OfflineData> prepare_offline(const RunConfig& cfg, const OfflineOptions& opt) {
  auto data = std::make_shared<OfflineData>();
  const auto t0 = std::chrono::steady_clock::now();
  data->cell = build_cell(cfg.cell);
  data->drift = std::make_shared<const DriftField>(solve_stokes(data->cell, cfg.mu, make_force(cfg.force)));
  data->ctx = std::make_shared<const CellContext>(data->cell, make_diffusion(cfg.diffusion), data->drift);
  data->stokes_seconds = seconds_since(t0);
  if (opt.need_table) ensure_table(*data, cfg, opt);
  return data;
}

std::shared_ptr<OfflineData> OfflineCache::get(const RunConfig& cfg, const OfflineOptions& opt) {
  const std::string key = offline_key(cfg);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    it = entries_.emplace(key, prepare_offline(cfg, opt)).first;
  } else if (opt.need_table) {
    ensure_table(*it->second, cfg, opt);
  }
  return it->second;
}

Mesh build_macro_mesh(const RunConfig& cfg) {
  return build_rect_mesh({cfg.macro.x0, cfg.macro.x1}, {cfg.macro.y0, cfg.macro.y1}, cfg.macro.nx,
                         cfg.macro.ny);
}

std::unique_ptr<MacroProblem> build_macro_problem(const RunConfig& cfg) {
  return std::make_unique<MacroProblem>(build_macro_mesh(cfg), make_source(cfg.source),
                                        make_initial(cfg.initial), make_dirichlet(cfg.boundary),
                                        cfg.load_refine);
}

RunOutput run_experiment(const RunConfig& cfg, OfflineCache* cache, std::optional<TensorMode> mode,
                         int jobs, bool force) {
  const TensorMode m = mode.value_or(cfg.mode);
  const int workers = jobs > 0 ? jobs : cfg.jobs;
  OfflineOptions opt{m == TensorMode::Precomputed, force, workers};
  RunOutput out;
  out.offline = cache ? cache->get(cfg, opt) : prepare_offline(cfg, opt);
  out.problem = build_macro_problem(cfg);

  SchemeSetup setup;
  setup.problem = out.problem.get();
  setup.t_final = cfg.t_final;
  setup.steps = cfg.steps;
  setup.g = drift_interaction(cfg.coupling);
  setup.tensors.mode = m;
  setup.tensors.ctx = out.offline->ctx.get();
  setup.tensors.table = out.offline->table.get();
  setup.tensors.jobs = workers;
  setup.tol = cfg.tol;
  setup.max_iter = cfg.max_iter;
  out.result = run_scheme(cfg.scheme, setup);
  out.result.timings.stokes = out.offline->stokes_seconds;
  out.result.timings.table = m == TensorMode::Precomputed ? out.offline->table_seconds : 0.0;
  return out;
}

}  // namespace dispersim
