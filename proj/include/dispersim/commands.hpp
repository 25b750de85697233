#pragma once

#include <iosfwd>
#include <string>

namespace dispersim {

struct CommandOptions {
  std::string config_path;
  std::string preset;
  std::string out_dir = ".";
  int jobs = 0;  // 0: take the value from the configuration
  bool force = false;
  /// converge: space | time | joint (default from the configuration)
  std::string axis;
  /// table: comma-separated knot list replacing the configured grid
  std::string knots;
  /// solve: scheme / tensor mode overrides
  std::string scheme;
  std::string mode;
  /// mesh-export: macro | cell | both
  std::string which = "both";
};

// Each command writes its artifacts into out_dir and returns a process exit
// code: 0 success, 1 runtime failure, 2 configuration or usage error.
int cmd_stokes(const CommandOptions& opt, std::ostream& log);
int cmd_table(const CommandOptions& opt, std::ostream& log);
int cmd_solve(const CommandOptions& opt, std::ostream& log);
int cmd_converge(const CommandOptions& opt, std::ostream& log);
int cmd_mesh_export(const CommandOptions& opt, std::ostream& log);

/// Dispatches by subcommand name and maps exceptions to exit codes.
int run_command(const std::string& name, const CommandOptions& opt, std::ostream& log,
                std::ostream& err);

}  // namespace dispersim
