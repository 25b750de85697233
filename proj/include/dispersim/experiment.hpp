#pragma once

#include "dispersim/cell.hpp"
#include "dispersim/config.hpp"
#include "dispersim/disptable.hpp"
#include "dispersim/macro.hpp"
#include "dispersim/schemes.hpp"
#include "dispersim/stokes.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>

namespace dispersim {

/// Products of the offline phase for one cell geometry and coefficient set.
struct OfflineData {
  std::shared_ptr<const CellMesh> cell;
  std::shared_ptr<const DriftField> drift;
  std::shared_ptr<const CellContext> ctx;
  std::shared_ptr<const DispersionTable> table;  // null until requested
  double stokes_seconds = 0.0;
  double table_seconds = 0.0;
};

struct OfflineOptions {
  bool need_table = true;
  /// Accept a table file whose geometry hash differs from the cell mesh.
  bool force = false;
  int jobs = 1;
};

std::shared_ptr<const CellMesh> build_cell(const CellSpec& spec);

/// Cell mesh, Stokes drift, cell context and (optionally) the dispersion
/// table. The table is read from cfg.table_file when set, built otherwise.
std::shared_ptr<OfflineData> prepare_offline(const RunConfig& cfg, const OfflineOptions& opt);

/// Offline data shared between runs with equal offline_key().
class OfflineCache {
 public:
  std::shared_ptr<OfflineData> get(const RunConfig& cfg, const OfflineOptions& opt);

 private:
  std::map<std::string, std::shared_ptr<OfflineData>> entries_;
};

Mesh build_macro_mesh(const RunConfig& cfg);
std::unique_ptr<MacroProblem> build_macro_problem(const RunConfig& cfg);

struct RunOutput {
  std::unique_ptr<MacroProblem> problem;
  SchemeResult result;
  std::shared_ptr<OfflineData> offline;
};

/// Runs the configured scheme and tensor mode. `mode` overrides cfg.mode.
RunOutput run_experiment(const RunConfig& cfg, OfflineCache* cache = nullptr,
                         std::optional<TensorMode> mode = std::nullopt, int jobs = 0,
                         bool force = false);

}  // namespace dispersim
