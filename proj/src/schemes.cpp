#include "dispersim/schemes.hpp"

#include "dispersim/errors.hpp"
#include "dispersim/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <unordered_map>

namespace dispersim {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

SchemeKind parse_scheme(const std::string& name) {
  if (name == "picard") return SchemeKind::Picard;
  if (name == "timestep") return SchemeKind::TimeStep;
  throw ConfigError("unknown scheme '" + name + "' (expected picard or timestep)");
}

TensorMode parse_tensor_mode(const std::string& name) {
  if (name == "direct") return TensorMode::Direct;
  if (name == "precomputed") return TensorMode::Precomputed;
  throw ConfigError("unknown tensor mode '" + name + "' (expected direct or precomputed)");
}

std::string scheme_name(SchemeKind s) { return s == SchemeKind::Picard ? "picard" : "timestep"; }
std::string tensor_mode_name(TensorMode m) { return m == TensorMode::Direct ? "direct" : "precomputed"; }

DriftInteraction drift_interaction(const std::string& name) {
  if (name == "one-minus-two-u") return {name, [](double u) { return 1.0 - 2.0 * u; }};
  if (name == "identity") return {name, [](double u) { return u; }};
  if (name == "zero") return {name, [](double) { return 0.0; }};
  throw ConfigError("unknown drift interaction '" + name + "'");
}

double drift_interaction(const std::string& name, double u) { return drift_interaction(name)(u); }

std::vector<std::string> drift_interaction_names() { return {"one-minus-two-u", "identity", "zero"}; }

double memo_key(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.14e", p);
  return std::strtod(buf, nullptr);
}

TensorField eval_tensor_field(const Eigen::VectorXd& u, const DriftInteraction& g,
                              const TensorSource& source, EvalStats* stats) {
  const auto n = static_cast<std::size_t>(u.size());
  TensorField field(n);
  if (stats) ++stats->evaluations;

  if (source.mode == TensorMode::Precomputed) {
    if (!source.table) throw ContractViolation("precomputed mode needs a table");
    for (std::size_t i = 0; i < n; ++i) field[i] = source.table->interp(g(u[static_cast<Index>(i)]));
    return field;
  }

  if (!source.ctx) throw ContractViolation("direct mode needs a cell context");
  std::vector<double> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = memo_key(g(u[static_cast<Index>(i)]));
  std::vector<double> unique = keys;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  std::vector<DispersionTensor> solved(unique.size());
  const std::size_t chunks = std::min<std::size_t>(static_cast<std::size_t>(std::max(source.jobs, 1)),
                                                   std::max<std::size_t>(unique.size(), 1));
  parallel_for(chunks, source.jobs, [&](std::size_t c) {
    CellWorkspace ws;
    const std::size_t begin = unique.size() * c / chunks;
    const std::size_t end = unique.size() * (c + 1) / chunks;
    for (std::size_t k = begin; k < end; ++k) solved[k] = dispersion_tensor(*source.ctx, ws.solve(*source.ctx, unique[k]));
  });
  if (stats) stats->cell_solves += unique.size();

  for (std::size_t i = 0; i < n; ++i) {
    const auto it = std::lower_bound(unique.begin(), unique.end(), keys[i]);
    field[i] = solved[static_cast<std::size_t>(it - unique.begin())];
  }
  return field;
}

void SchemeSetup::validate() const {
  if (!problem) throw ContractViolation("scheme setup has no macro problem");
  if (!(t_final > 0.0)) throw ConfigError("final time T must be positive");
  if (steps < 1) throw ConfigError("number of time steps M must be at least 1");
  if (!(tol > 0.0)) throw ConfigError("Picard tolerance must be positive");
  if (max_iter < 1) throw ConfigError("Picard iteration cap must be at least 1");
  if (!g.g) throw ConfigError("drift interaction missing");
}

SchemeResult run_scheme2(const SchemeSetup& setup) {
  setup.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const MacroProblem& pb = *setup.problem;
  const double dt = setup.dt();
  SchemeResult out;
  EvalStats stats;
  MacroStepper stepper(pb);
  out.trajectory.times.push_back(0.0);
  out.trajectory.states.push_back(pb.initial_state());
  for (int n = 1; n <= setup.steps; ++n) {
    const double tn = n * dt;
    const TensorField tensors = eval_tensor_field(out.trajectory.states.back(), setup.g, setup.tensors, &stats);
    Eigen::VectorXd next = stepper.step(out.trajectory.states.back(), tensors, tn, dt);
    out.trajectory.times.push_back(tn);
    out.trajectory.states.push_back(std::move(next));
  }
  out.timings.online = seconds_since(t0);
  out.timings.cell_solves = stats.cell_solves;
  return out;
}

SchemeResult run_scheme1(const SchemeSetup& setup) {
  setup.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const MacroProblem& pb = *setup.problem;
  const double dt = setup.dt();
  const auto m = static_cast<std::size_t>(setup.steps);
  EvalStats stats;
  SchemeResult out;

  Trajectory current;
  const Eigen::VectorXd u0 = pb.initial_state();
  for (std::size_t n = 0; n <= m; ++n) {
    current.times.push_back(static_cast<double>(n) * dt);
    current.states.push_back(u0);
  }

  MacroStepper stepper(pb);
  for (int k = 0; k < setup.max_iter; ++k) {
    std::vector<TensorField> fields(m);
    for (std::size_t n = 1; n <= m; ++n) {
      fields[n - 1] = eval_tensor_field(current.states[n - 1], setup.g, setup.tensors, &stats);
    }
    Trajectory next;
    next.times = current.times;
    next.states.reserve(m + 1);
    next.states.push_back(u0);
    for (std::size_t n = 1; n <= m; ++n) {
      next.states.push_back(stepper.step(next.states.back(), fields[n - 1], current.times[n], dt));
    }
    const double e = l2_space_time_diff(pb.mass(), next.states, current.states, dt);
    if (!out.log.errors.empty()) out.log.ratios.push_back(out.log.errors.back() > 0.0 ? e / out.log.errors.back() : 0.0);
    out.log.errors.push_back(e);
    out.log.iterations = k + 1;
    current = std::move(next);
    if (e < setup.tol) {
      out.log.converged = true;
      break;
    }
  }
  out.trajectory = std::move(current);
  out.timings.online = seconds_since(t0);
  out.timings.cell_solves = stats.cell_solves;
  return out;
}

SchemeResult run_scheme(SchemeKind kind, const SchemeSetup& setup) {
  return kind == SchemeKind::Picard ? run_scheme1(setup) : run_scheme2(setup);
}

}  // namespace dispersim
