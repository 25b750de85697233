#include "dispersim/study.hpp"

#include "dispersim/errors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace dispersim {

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractViolation("slope fit needs two or more points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ContractViolation("slope fit needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw ContractViolation("slope fit needs distinct abscissae");
  return (n * sxy - sx * sy) / den;
}

StudyResult run_study(const RunConfig& cfg, const std::string& axis_override, int jobs,
                      const std::function<void(const std::string&)>& progress) {
  StudyResult out;
  out.axis = axis_override.empty() ? cfg.study.axis : axis_override;
  if (out.axis.empty()) throw ConfigError("no convergence study configured");
  if (out.axis != "space" && out.axis != "time" && out.axis != "joint") {
    throw ConfigError("study axis must be space, time or joint");
  }
  if (cfg.study.levels.size() < 3) throw ConfigError("a convergence study needs at least 3 levels");

  OfflineCache cache;
  std::unique_ptr<MacroProblem> prev_problem;
  Trajectory prev_traj;
  for (std::size_t l = 0; l < cfg.study.levels.size(); ++l) {
    const RunConfig level_cfg = with_patch(cfg, cfg.study.levels[l]);
    RunOutput run = run_experiment(level_cfg, &cache, std::nullopt, jobs);
    StudyLevel level;
    level.macro_dofs = run.problem->size();
    level.micro_dofs = run.offline->ctx->dofs().num_dofs();
    level.steps = level_cfg.steps;
    level.h = run.problem->mesh().h_max();
    level.dt = level_cfg.t_final / level_cfg.steps;
    level.online_seconds = run.result.timings.online;
    level.offline_seconds = run.result.timings.stokes + run.result.timings.table;
    if (l > 0) {
      out.levels.back().error = coarse_fine_distance(prev_problem->mesh(), prev_traj, run.problem->mesh(),
                                                     run.problem->mass(), run.result.trajectory);
    }
    if (progress) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "level %zu: %d macro dofs, %d micro dofs, M=%d, online %.2fs",
                    l, level.macro_dofs, level.micro_dofs, level.steps, level.online_seconds);
      progress(buf);
    }
    out.levels.push_back(level);
    prev_problem = std::move(run.problem);
    prev_traj = std::move(run.result.trajectory);
  }

  std::vector<double> xs, ys;
  for (const auto& level : out.levels) {
    if (!level.error) continue;
    xs.push_back(out.axis == "time" ? level.dt : level.h);
    ys.push_back(*level.error);
  }
  out.slope = fit_loglog_slope(xs, ys);
  return out;
}

void write_study_csv(std::ostream& out, const StudyResult& study) {
  out << "level,macro_dofs,micro_dofs,M,H,dt,error,log_H,log_dt,log_error,online_seconds,offline_seconds\n";
  char buf[512];
  for (std::size_t l = 0; l < study.levels.size(); ++l) {
    const auto& s = study.levels[l];
    const std::string err = s.error ? [&] {
      char e[64];
      std::snprintf(e, sizeof(e), "%.17g", *s.error);
      return std::string(e);
    }() : std::string();
    const std::string log_err = s.error ? [&] {
      char e[64];
      std::snprintf(e, sizeof(e), "%.17g", std::log10(*s.error));
      return std::string(e);
    }() : std::string();
    std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%d,%.17g,%.17g,%s,%.17g,%.17g,%s,%.6f,%.6f\n", l,
                  s.macro_dofs, s.micro_dofs, s.steps, s.h, s.dt, err.c_str(), std::log10(s.h),
                  std::log10(s.dt), log_err.c_str(), s.online_seconds, s.offline_seconds);
    out << buf;
  }
}

}  // namespace dispersim
