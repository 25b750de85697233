#include "dispersim/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Two-scale dispersion solver: cell problems, dispersion tables and macro runs"};
  app.require_subcommand(1);

  dispersim::CommandOptions opt;
  auto common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON configuration file");
    sub->add_option("--preset", opt.preset, "shipped preset name (or base for --config)");
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--jobs", opt.jobs, "worker threads (0 keeps the configured value)")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--force", opt.force, "accept a table file whose geometry hash does not match");
  };

  auto* stokes = app.add_subcommand("stokes", "solve the periodic Stokes drift and verify it");
  common(stokes);
  auto* table = app.add_subcommand("table", "build the offline dispersion table");
  common(table);
  table->add_option("--knots", opt.knots, "comma-separated knot list replacing the configured grid");
  auto* solve = app.add_subcommand("solve", "run one macro simulation");
  common(solve);
  solve->add_option("--scheme", opt.scheme, "picard | timestep");
  solve->add_option("--mode", opt.mode, "direct | precomputed");
  auto* converge = app.add_subcommand("converge", "run a refinement study and fit the order");
  common(converge);
  converge->add_option("--axis", opt.axis, "space | time | joint");
  auto* mesh = app.add_subcommand("mesh-export", "write the macro and cell meshes");
  common(mesh);
  mesh->add_option("--which", opt.which, "macro | cell | both")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  return dispersim::run_command(name, opt, std::cout, std::cerr);
}
