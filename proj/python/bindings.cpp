#include "dispersim/cell.hpp"
#include "dispersim/commands.hpp"
#include "dispersim/config.hpp"
#include "dispersim/errors.hpp"
#include "dispersim/experiment.hpp"
#include "dispersim/stokes.hpp"
#include "dispersim/study.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace dispersim;

namespace {

Eigen::MatrixXd points(const std::vector<Point>& xs) {
  Eigen::MatrixXd out(static_cast<Index>(xs.size()), 2);
  for (std::size_t i = 0; i < xs.size(); ++i) out.row(static_cast<Index>(i)) = xs[i].transpose();
  return out;
}

Eigen::MatrixXi triangles(const Mesh& m) {
  Eigen::MatrixXi out(m.num_triangles(), 3);
  for (Index t = 0; t < m.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) out(t, k) = static_cast<int>(m.triangles()[t][static_cast<std::size_t>(k)]);
  }
  return out;
}

py::dict mesh_dict(const Mesh& m) {
  py::dict d;
  d["vertices"] = points(m.vertices());
  d["triangles"] = triangles(m);
  d["hash"] = geometry_hash(m);
  return d;
}

Eigen::MatrixXd stack(const std::vector<Eigen::VectorXd>& states) {
  if (states.empty()) return {};
  Eigen::MatrixXd out(static_cast<Index>(states.size()), states.front().size());
  for (std::size_t n = 0; n < states.size(); ++n) out.row(static_cast<Index>(n)) = states[n].transpose();
  return out;
}

std::shared_ptr<OfflineData> offline(const RunConfig& cfg, bool need_table, int jobs) {
  OfflineOptions opt;
  opt.need_table = need_table;
  opt.jobs = jobs > 0 ? jobs : cfg.jobs;
  return prepare_offline(cfg, opt);
}

}  // namespace

PYBIND11_MODULE(_dispersim, m) {
  m.doc() = "Two-scale dispersion solver: periodic Stokes drift, cell problems, tabulated tensors and macro schemes.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidGeometry>(m, "InvalidGeometry", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);
  py::register_exception<SingularSystem>(m, "SingularSystem", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<RunConfig>(m, "RunConfig")
      .def_property_readonly("name", [](const RunConfig& c) { return c.name; })
      .def_property_readonly("json", [](const RunConfig& c) { return c.raw.dump(); })
      .def_property_readonly("offline_key", [](const RunConfig& c) { return offline_key(c); })
      .def("__repr__", [](const RunConfig& c) { return "<RunConfig " + c.name + ">"; });

  m.def("preset_names", &preset_names);
  m.def("load_preset", &load_preset, py::arg("name"));
  m.def("parse_config", &parse_config_text, py::arg("text"), "Parses configuration JSON text.");
  m.def("with_patch", [](const RunConfig& c, const std::string& patch) { return with_patch(c, Json::parse(patch)); },
        py::arg("config"), py::arg("patch"));
  m.def("config_schema", [] { return config_schema().dump(); });

  m.def("macro_mesh", [](const RunConfig& c) { return mesh_dict(build_macro_mesh(c)); }, py::arg("config"));
  m.def("cell_mesh", [](const RunConfig& c) { return mesh_dict(build_cell(c.cell)->mesh); }, py::arg("config"));

  m.def(
      "stokes",
      [](const RunConfig& c) {
        const auto off = offline(c, false, 0);
        const DriftField& b = *off->drift;
        const DriftReport r = verify_drift(b);
        py::dict d;
        d["nodes"] = points(b.velocity_dofs.node_coords());
        d["b1"] = b.b1;
        d["b2"] = b.b2;
        d["pressure"] = b.pressure;
        d["max_wall_velocity"] = r.max_wall_velocity;
        d["max_divergence"] = r.max_divergence;
        d["periodicity_mismatch"] = r.periodicity_mismatch;
        d["pass"] = r.pass;
        d["seconds"] = off->stokes_seconds;
        return d;
      },
      py::arg("config"), "Solves the cell Stokes problem and audits the drift.");

  m.def(
      "dispersion_tensor",
      [](const RunConfig& c, double p) {
        const auto off = offline(c, false, 0);
        return Mat2(dispersion_tensor(*off->ctx, solve_cell(*off->ctx, p)));
      },
      py::arg("config"), py::arg("p"), "Effective tensor D*(p) from one cell solve.");

  py::class_<DispersionTable>(m, "DispersionTable")
      .def_property_readonly("knots", &DispersionTable::knots)
      .def_property_readonly("values", [](const DispersionTable& t) {
        std::vector<Mat2> v(t.values().begin(), t.values().end());
        return v;
      })
      .def("interp", [](const DispersionTable& t, double p) { return Mat2(t.interp(p)); }, py::arg("p"))
      .def("__len__", &DispersionTable::size)
      .def("to_csv", [](const DispersionTable& t) {
        std::ostringstream out;
        write_table(out, t);
        return out.str();
      });

  m.def(
      "build_table",
      [](const RunConfig& c, std::optional<std::vector<double>> knots, int jobs) {
        const auto off = offline(c, false, jobs);
        const std::vector<double> k = knots ? *knots : make_p_grid(c.knots);
        py::gil_scoped_release release;
        return build_table(*off->ctx, k, jobs > 0 ? jobs : c.jobs, {off->ctx->geometry_hash(), {}});
      },
      py::arg("config"), py::arg("knots") = py::none(), py::arg("jobs") = 0);

  m.def(
      "run",
      [](const RunConfig& c, std::optional<std::string> mode, int jobs) {
        std::optional<TensorMode> tm;
        if (mode) tm = parse_tensor_mode(*mode);
        RunOutput out;
        {
          py::gil_scoped_release release;
          out = run_experiment(c, nullptr, tm, jobs);
        }
        py::dict d;
        d["vertices"] = points(out.problem->mesh().vertices());
        d["times"] = out.result.trajectory.times;
        d["states"] = stack(out.result.trajectory.states);
        d["picard_errors"] = out.result.log.errors;
        d["converged"] = out.result.log.converged;
        d["online_seconds"] = out.result.timings.online;
        d["cell_solves"] = out.result.timings.cell_solves;
        d["l2_space_time"] =
            l2_space_time(out.problem->mass(), out.result.trajectory.states, c.t_final / c.steps);
        return d;
      },
      py::arg("config"), py::arg("mode") = py::none(), py::arg("jobs") = 0,
      "Runs the configured scheme; mode overrides the tensor mode (direct or precomputed).");

  m.def(
      "study",
      [](const RunConfig& c, const std::string& axis, int jobs) {
        StudyResult s;
        {
          py::gil_scoped_release release;
          s = run_study(c, axis, jobs);
        }
        py::list levels;
        for (const auto& l : s.levels) {
          py::dict d;
          d["macro_dofs"] = l.macro_dofs;
          d["micro_dofs"] = l.micro_dofs;
          d["steps"] = l.steps;
          d["h"] = l.h;
          d["dt"] = l.dt;
          d["error"] = l.error ? py::cast(*l.error) : py::none();
          levels.append(d);
        }
        py::dict d;
        d["axis"] = s.axis;
        d["slope"] = s.slope;
        d["levels"] = levels;
        return d;
      },
      py::arg("config"), py::arg("axis") = "", py::arg("jobs") = 0);

  m.def(
      "run_command",
      [](const std::string& name, const std::string& config, const std::string& preset, const std::string& out,
         int jobs, bool force) {
        CommandOptions opt;
        opt.config_path = config;
        opt.preset = preset;
        opt.out_dir = out;
        opt.jobs = jobs;
        opt.force = force;
        std::ostringstream log, err;
        const int code = run_command(name, opt, log, err);
        return py::make_tuple(code, log.str(), err.str());
      },
      py::arg("name"), py::arg("config") = "", py::arg("preset") = "", py::arg("out") = ".", py::arg("jobs") = 0,
      py::arg("force") = false, "Runs a CLI subcommand in-process; returns (exit_code, log, errors).");
}
