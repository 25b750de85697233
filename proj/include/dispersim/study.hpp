#pragma once

#include "dispersim/config.hpp"
#include "dispersim/experiment.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dispersim {

/// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

struct StudyLevel {
  Index macro_dofs = 0;
  Index micro_dofs = 0;
  int steps = 0;
  double h = 0.0;   // macro h_max
  double dt = 0.0;
  double online_seconds = 0.0;
  double offline_seconds = 0.0;
  /// Distance to the next finer level; absent for the finest one.
  std::optional<double> error;
};

struct StudyResult {
  std::string axis;
  std::vector<StudyLevel> levels;
  double slope = 0.0;  // against h (space, joint) or dt (time)
};

/// Runs every level of cfg.study (or `axis_override`), measuring each level
/// against the next finer one with the coarse-on-fine rule.
StudyResult run_study(const RunConfig& cfg, const std::string& axis_override = {}, int jobs = 0,
                      const std::function<void(const std::string&)>& progress = {});

/// CSV with one row per level and log columns for plotting.
void write_study_csv(std::ostream& out, const StudyResult& study);

}  // namespace dispersim
