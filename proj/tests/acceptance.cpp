// Acceptance run: one PASS/FAIL line per criterion with the measured values.
// Exit status is 1 when any criterion fails.

#include "dispersim/cell.hpp"
#include "dispersim/config.hpp"
#include "dispersim/experiment.hpp"
#include "dispersim/macro.hpp"
#include "dispersim/stokes.hpp"
#include "dispersim/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace dispersim;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(const char* id, bool pass, const std::string& detail, double seconds) {
  std::printf("%s %s %s (%.2f s)\n", id, pass ? "PASS" : "FAIL", detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

// Runs `body`, turning exceptions into a failing line.
void criterion(const char* id, const std::function<void(Clock::time_point)>& body) {
  const auto t0 = Clock::now();
  try {
    body(t0);
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what(), since(t0));
  }
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[192];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

double relative(const MacroProblem& pb, const Trajectory& a, const Trajectory& b, double dt) {
  return l2_space_time_diff(pb.mass(), a.states, b.states, dt) / l2_space_time(pb.mass(), b.states, dt);
}

double max_abs(const Trajectory& tr) {
  double m = 0.0;
  for (const auto& s : tr.states) m = std::max(m, s.cwiseAbs().maxCoeff());
  return m;
}

// Mean of the P1 field over {y > y_mid}; y_mid must be a mesh line.
double upper_mean(const Mesh& mesh, const Eigen::VectorXd& u, double y_mid) {
  double integral = 0.0, area = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    double yc = 0.0, uc = 0.0;
    for (Index v : tri) {
      yc += mesh.vertices()[v].y() / 3.0;
      uc += u(v) / 3.0;
    }
    if (yc <= y_mid) continue;
    const double a = mesh.triangle_area(t);
    integral += a * uc;
    area += a;
  }
  return integral / area;
}

// The first scenario on 256 macro nodes with M = 20, shared by the scheme
// comparison, table accuracy and timing criteria.
RunConfig small_macro(const RunConfig& base, const std::string& scheme) {
  return with_patch(base, Json{{"macro", {{"nx", 15}, {"ny", 15}}}, {"time", {{"M", 20}}}, {"scheme", scheme}});
}

}  // namespace

int main() {
  OfflineCache cache;
  const RunConfig first = load_preset("paper-5.1");

  criterion("AC1", [&](Clock::time_point t0) {
    const auto free_cell = std::make_shared<const CellMesh>(build_cell_mesh({}, 16));
    auto drift = std::make_shared<const DriftField>(solve_stokes(free_cell, first.mu, make_force(first.force)));
    const CellContext ctx(free_cell, MatrixCoefficient::uniform(Mat2::Identity(), "identity"), drift);
    double err_identity = 0.0;
    for (double p : {-5.0, 0.0, 7.0}) {
      const Mat2 d = dispersion_tensor(ctx, solve_cell(ctx, p));
      err_identity = std::max(err_identity, (d - Mat2::Identity()).cwiseAbs().maxCoeff());
    }
    const CellContext mean_ctx(std::make_shared<const CellMesh>(build_cell_mesh({}, 64)), make_diffusion(first.diffusion),
                               nullptr);
    CellSolution zero;
    zero.w1 = Eigen::VectorXd::Zero(mean_ctx.dofs().num_dofs());
    zero.w2 = zero.w1;
    const Mat2 dm = dispersion_tensor(mean_ctx, zero);
    Mat2 expected = Mat2::Zero();
    expected(0, 0) = 2.0 + 4.0 / (M_PI * M_PI);
    expected(1, 1) = 2.0 + 2.0 / M_PI;
    const double err_mean = (dm - expected).cwiseAbs().maxCoeff();
    const double secs = since(t0);
    report("AC1", err_identity <= 1e-10 && err_mean <= 1e-6 && secs < 5.0,
           fmt("identity err %.3e (tol 1e-10), zero-corrector err %.3e (tol 1e-6), limit 5 s", err_identity, err_mean),
           secs);
  });

  criterion("AC2", [&](Clock::time_point t0) {
    OfflineOptions opt;
    opt.need_table = false;
    const auto off = prepare_offline(first, opt);
    const DriftReport r = verify_drift(*off->drift, 1e-8);
    const double worst = std::max({r.max_wall_velocity, r.max_divergence, r.periodicity_mismatch});
    const double secs = since(t0);
    report("AC2", r.pass && worst <= 1e-8 && secs < 30.0,
           fmt("wall %.3e, ", r.max_wall_velocity) + fmt("divergence %.3e, ", r.max_divergence) +
               fmt("periodicity %.3e (tol 1e-8), limit 30 s", r.periodicity_mismatch),
           secs);
  });

  criterion("AC3", [&](Clock::time_point t0) {
    const RunConfig cfg = with_patch(first, Json{{"time", {{"M", 20}}}, {"scheme", "picard"}});
    const RunOutput out = run_experiment(cfg, &cache, TensorMode::Precomputed);
    const auto& log = out.result.log;
    bool ok = log.converged && log.iterations <= 10 && out.problem->size() >= 1024;
    std::string errs;
    for (std::size_t k = 0; k < log.errors.size(); ++k) {
      errs += fmt(k ? ",%.3e" : "%.3e", log.errors[k]);
      if (k > 0) ok = ok && log.errors[k] < log.errors[k - 1] && log.errors[k] / log.errors[k - 1] <= 0.1;
    }
    const double secs = since(t0);
    report("AC3", ok && secs < 600.0,
           "dofs " + std::to_string(out.problem->size()) + ", e^k = [" + errs + "], iterations " +
               std::to_string(log.iterations) + " (max 10, ratio <= 0.1)",
           secs);
  });

  criterion("AC4", [&](Clock::time_point t0) {
    const RunOutput p = run_experiment(small_macro(first, "picard"), &cache, TensorMode::Precomputed);
    const RunOutput s = run_experiment(small_macro(first, "timestep"), &cache, TensorMode::Precomputed);
    const double dt = first.t_final / 20;
    const double rel = relative(*s.problem, p.result.trajectory, s.result.trajectory, dt);
    report("AC4", rel <= 1e-3,
           "dofs " + std::to_string(s.problem->size()) + fmt(", |u1-u2|/|u2| = %.3e (tol 1e-3)", rel), since(t0));
  });

  criterion("AC5", [&](Clock::time_point t0) {
    const StudyResult st = run_study(load_preset("paper-5.2-space"));
    report("AC5", st.slope >= 1.7 && st.slope <= 2.3, fmt("space slope %.4f (range [1.7, 2.3])", st.slope), since(t0));
  });

  criterion("AC6", [&](Clock::time_point t0) {
    const StudyResult st = run_study(load_preset("paper-5.2-time"));
    const Index dofs = st.levels.empty() ? 0 : st.levels.front().macro_dofs;
    report("AC6", st.slope >= 0.8 && st.slope <= 1.2,
           "dofs " + std::to_string(dofs) + fmt(", time slope %.4f (range [0.8, 1.2])", st.slope), since(t0));
  });

  // Direct reference shared by the table accuracy and timing criteria.
  const RunConfig small = small_macro(first, "picard");
  std::unique_ptr<RunOutput> direct;
  criterion("AC7", [&](Clock::time_point t0) {
    direct = std::make_unique<RunOutput>(run_experiment(small, &cache, TensorMode::Direct));
    const double dt = small.t_final / small.steps;
    std::vector<double> errs;
    for (int inner : {101, 201, 401}) {
      const RunConfig c = with_patch(small, Json{{"table", {{"inner_count", inner}}}});
      const RunOutput pre = run_experiment(c, &cache, TensorMode::Precomputed);
      errs.push_back(relative(*pre.problem, pre.result.trajectory, direct->result.trajectory, dt));
    }
    const bool ok = errs[0] <= 1e-2 && errs[1] < errs[0] && errs[2] < errs[1];
    report("AC7", ok,
           fmt("rel err 201 knots %.6e (tol 1e-2); ", errs[0]) + fmt("301 knots %.6e, ", errs[1]) +
               fmt("501 knots %.6e (strictly decreasing)", errs[2]),
           since(t0));
  });

  criterion("AC8", [&](Clock::time_point t0) {
    if (!direct) direct = std::make_unique<RunOutput>(run_experiment(small, &cache, TensorMode::Direct));
    const RunOutput pre = run_experiment(small, &cache, TensorMode::Precomputed);
    const double td = direct->result.timings.online;
    const double tp = pre.result.timings.online;
    report("AC8", tp * 20.0 <= td, fmt("online direct %.4f s, precomputed %.4f s (need <= 1/20)", td, tp), since(t0));
  });

  criterion("AC9", [&](Clock::time_point t0) {
    OfflineOptions opt;
    const auto off = cache.get(first, opt);
    const DispersionTable& t = *off->table;
    bool exact = true;
    double mid_err = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      exact = exact && t.interp(t.knots()[k]) == t.values()[k];
      if (k + 1 < t.size()) {
        const double mid = 0.5 * (t.knots()[k] + t.knots()[k + 1]);
        const Mat2 avg = 0.5 * (t.values()[k] + t.values()[k + 1]);
        mid_err = std::max(mid_err, (t.interp(mid) - avg).cwiseAbs().maxCoeff() / avg.cwiseAbs().maxCoeff());
      }
    }
    const bool clamp = t.interp(-1e300) == t.values().front() && t.interp(1e300) == t.values().back();
    report("AC9", exact && clamp && mid_err <= 1e-14,
           std::string("knots exact ") + (exact ? "yes" : "no") + ", clamped " + (clamp ? "yes" : "no") +
               fmt(", midpoint rel err %.3e (tol 1e-14)", mid_err),
           since(t0));
  });

  criterion("AC10", [&](Clock::time_point t0) {
    const RunConfig free = with_patch(small, Json{{"source", {{"type", "zero"}}}});
    const RunOutput a = run_experiment(free, &cache, TensorMode::Precomputed);
    const double sup0 = a.problem->sup_initial();
    const double m0 = max_abs(a.result.trajectory);
    const RunOutput g1 = run_experiment(load_preset("paper-5.3-geom1"), &cache);
    const RunOutput g2 = run_experiment(load_preset("paper-5.3-geom2"), &cache);
    const double m1 = max_abs(g1.result.trajectory);
    const double m2 = max_abs(g2.result.trajectory);
    const bool ok = m0 <= sup0 + 1e-10 && m1 <= 10.0 * 1.05 && m2 <= 10.0 * 1.05;
    report("AC10", ok,
           fmt("f=0: max|u| %.12f vs |u0| %.12f (tol 1e-10); ", m0, sup0) +
               fmt("ramp bc: geom1 max %.4f, geom2 max %.4f (bound 10.5)", m1, m2),
           since(t0));
  });

  criterion("AC11", [&](Clock::time_point t0) {
    const RunOutput g1 = run_experiment(load_preset("paper-5.3-geom1"), &cache);
    const RunOutput g2 = run_experiment(load_preset("paper-5.3-geom2"), &cache);
    const double a = upper_mean(g1.problem->mesh(), g1.result.trajectory.states.back(), 0.5);
    const double b = upper_mean(g2.problem->mesh(), g2.result.trajectory.states.back(), 0.5);
    report("AC11", b < a, fmt("upper-half mean at T: geom1 %.6f, geom2 %.6f (need geom2 < geom1)", a, b), since(t0));
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
