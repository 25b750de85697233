#pragma once

#include "dispersim/cell.hpp"
#include "dispersim/disptable.hpp"
#include "dispersim/macro.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace dispersim {

enum class SchemeKind { Picard, TimeStep };
enum class TensorMode { Direct, Precomputed };

SchemeKind parse_scheme(const std::string& name);
TensorMode parse_tensor_mode(const std::string& name);
std::string scheme_name(SchemeKind s);
std::string tensor_mode_name(TensorMode m);

/// Named coupling p = G(u) between macro concentration and cell drift.
struct DriftInteraction {
  std::string name;
  std::function<double(double)> g;

  double operator()(double u) const { return g(u); }
};

/// Registered choices: "one-minus-two-u" (G(u) = 1 - 2u, the default),
/// "identity", "zero". Unknown names are a ConfigError.
DriftInteraction drift_interaction(const std::string& name);
double drift_interaction(const std::string& name, double u);
std::vector<std::string> drift_interaction_names();

/// Where nodal tensors come from: cell solves (direct) or table lookup.
struct TensorSource {
  TensorMode mode = TensorMode::Precomputed;
  const CellContext* ctx = nullptr;
  const DispersionTable* table = nullptr;
  int jobs = 1;
};

struct EvalStats {
  std::size_t evaluations = 0;
  std::size_t cell_solves = 0;
};

/// p rounded to 15 significant digits; the memo key of direct evaluation.
double memo_key(double p);

/// Tensor at every macro node for p = G(u(node)). In direct mode equal p
/// values (after rounding) share one cell solve.
TensorField eval_tensor_field(const Eigen::VectorXd& u, const DriftInteraction& g,
                              const TensorSource& source, EvalStats* stats = nullptr);

struct SchemeSetup {
  const MacroProblem* problem = nullptr;
  double t_final = 1.0;
  int steps = 1;
  DriftInteraction g;
  TensorSource tensors;
  double tol = 1e-7;
  int max_iter = 10;

  double dt() const { return t_final / steps; }
  void validate() const;
};

struct Timings {
  double stokes = 0.0;  // offline
  double table = 0.0;   // offline
  double online = 0.0;  // macro loop including tensor evaluation
  std::size_t cell_solves = 0;
};

struct IterationLog {
  std::vector<double> errors;  // e^k, k = 0, 1, ...
  std::vector<double> ratios;  // e^{k+1} / e^k
  int iterations = 0;
  bool converged = false;
};

struct SchemeResult {
  Trajectory trajectory;
  IterationLog log;  // empty for the time-stepping scheme
  Timings timings;
};

/// Per-step decoupling: tensors from u_{n-1}, then one implicit Euler step.
SchemeResult run_scheme2(const SchemeSetup& setup);

/// Whole-trajectory Picard iteration starting from u^0(t) = u_0. All M tensor
/// fields of an iterate are built from the frozen previous iterate before the
/// sweep. Stops when e^k < tol or after max_iter iterates (converged = false).
SchemeResult run_scheme1(const SchemeSetup& setup);

SchemeResult run_scheme(SchemeKind kind, const SchemeSetup& setup);

}  // namespace dispersim
