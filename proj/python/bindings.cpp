#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "irkmg/config.hpp"
#include "irkmg/error.hpp"
#include "irkmg/harness.hpp"
#include "irkmg/mesh.hpp"
#include "irkmg/tableau.hpp"

namespace py = pybind11;
using namespace irkmg;

namespace
{

ButcherTableau lookup(const std::string &family, std::optional<int> stages)
{
  const TableauFamily f = parse_family(family);
  return tableau_lookup(f, stages.value_or(default_stages(f)));
}

py::dict row_to_dict(const RunRow &r)
{
  py::dict d;
  d["scheme"] = r.scheme;
  d["stages"] = r.stages;
  d["level"] = r.level;
  d["dt"] = r.dt;
  d["steps"] = r.steps;
  d["vel_error"] = r.vel_error;
  d["pres_error"] = r.pres_error;
  d["avg_linear_iters"] = r.avg_linear_iters;
  d["avg_newton_iters"] = r.avg_newton_iters;
  d["wall_seconds"] = r.wall_seconds;
  d["max_divergence_ratio"] = r.max_divergence_ratio;
  d["linear_iters_per_step"] = r.linear_iters_per_step;
  d["newton_iters_per_step"] = r.newton_iters_per_step;
  return d;
}

}  // namespace

PYBIND11_MODULE(_irkmg, m)
{
  m.doc() = "Monolithic multigrid for implicit Runge-Kutta Stokes and Navier-Stokes";

  py::register_exception<SolverFailure>(m, "SolverFailure", PyExc_RuntimeError);

  py::class_<ButcherTableau>(m, "Tableau")
      .def_readonly("name", &ButcherTableau::name)
      .def_readonly("A", &ButcherTableau::A)
      .def_readonly("b", &ButcherTableau::b)
      .def_readonly("c", &ButcherTableau::c)
      .def_readonly("order", &ButcherTableau::order)
      .def_readonly("stage_order", &ButcherTableau::stage_order)
      .def_readonly("l_stable", &ButcherTableau::l_stable)
      .def_property_readonly("stages", &ButcherTableau::stages)
      .def("stiffly_accurate", &ButcherTableau::stiffly_accurate, py::arg("tol") = 1e-14)
      .def("__repr__", [](const ButcherTableau &t) { return "<Tableau " + t.name + ">"; });

  m.def("tableau", &lookup, py::arg("family"), py::arg("stages") = py::none());
  m.def("registry", &tableau_registry);
  m.def(
      "consistency_check",
      [](const ButcherTableau &t) {
        const auto rep = consistency_check(t);
        py::dict d;
        d["passed"] = rep.passed;
        d["sum_b"] = rep.sum_b;
        d["row_sum_defects"] = rep.row_sum_defects;
        d["quadrature_order"] = rep.quadrature_order;
        d["stage_order"] = rep.stage_order;
        d["message"] = rep.message;
        return d;
      },
      py::arg("tableau"));
  m.def("stability_function", &stability_function, py::arg("tableau"), py::arg("z"));
  m.def("tableau_report", &tableau_report, py::arg("tableau"));

  m.def(
      "count_dofs",
      [](int n0, int refinements) {
        const auto c = count_dofs(n0, refinements);
        py::dict d;
        d["velocity"] = c.velocity;
        d["pressure"] = c.pressure;
        d["total"] = c.total;
        return d;
      },
      py::arg("n0"), py::arg("refinements"));
  m.def(
      "mesh_counts",
      [](int n) {
        const Mesh2D mesh = build_crossed_grid(n);
        return py::make_tuple(mesh.num_vertices(), mesh.num_edges(), mesh.num_cells());
      },
      py::arg("n"));

  m.def(
      "ew_forcing",
      [](double eta_prev, double norm_k, double norm_prev, double gamma, double alpha,
         double eta_max) {
        NewtonConfig c;
        c.ew_gamma = gamma;
        c.ew_alpha = alpha;
        c.eta_max = eta_max;
        const auto f = ew_forcing(eta_prev, norm_k, norm_prev, c);
        return py::make_tuple(f.eta, f.safeguarded);
      },
      py::arg("eta_prev"), py::arg("norm_k"), py::arg("norm_prev"), py::arg("gamma") = 0.9,
      py::arg("alpha") = 2.0, py::arg("eta_max") = 0.9);

  m.def("convergence_rate", &convergence_rate, py::arg("coarse_error"), py::arg("fine_error"));

  m.def(
      "run",
      [](const std::string &problem, const py::dict &options) {
        RunConfig cfg;
        cfg.problem = parse_problem(problem);
        bool stages_given = false;
        for (const auto &[k, v] : options)
        {
          const auto key = py::str(k).cast<std::string>();
          stages_given = stages_given || key == "stages";
          apply_config_value(cfg, key, py::str(v).cast<std::string>());
        }
        if (!stages_given)
        {
          cfg.stages = default_stages(cfg.family);
        }
        RunRow row;
        {
          py::gil_scoped_release release;
          row = run_problem(cfg);
        }
        return row_to_dict(row);
      },
      py::arg("problem"), py::arg("options") = py::dict(),
      "Runs one configuration. Option names are the configuration keys.");
  m.def("config_keys", &config_keys);

  m.def("mms_velocity", &mms_velocity, py::arg("x"), py::arg("y"), py::arg("t"));
  m.def("taylor_green_pressure", &taylor_green_pressure, py::arg("x"), py::arg("y"),
        py::arg("t"));
}
