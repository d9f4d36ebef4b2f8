#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pullin/config.hpp"
#include "pullin/coupling.hpp"
#include "pullin/errors.hpp"
#include "pullin/field.hpp"
#include "pullin/io.hpp"
#include "pullin/oracles.hpp"
#include "pullin/specimens.hpp"

namespace py = pybind11;
using namespace pullin;

namespace {

py::dict step_to_dict(const StepOutcome& s) {
  py::dict d;
  d["voltage"] = s.voltage;
  d["tip_deflection"] = s.tip_deflection;
  d["inner_iterations"] = s.iterations;
  d["converged"] = s.converged;
  d["termination"] = to_string(s.termination);
  d["capacitance"] = s.capacitance ? py::cast(*s.capacitance) : py::none();
  d["electrostatic_force"] = s.electrostatic_force;
  return d;
}

py::list sweep_to_list(const SweepResult& r) {
  py::list out;
  for (const auto& s : r.steps) out.append(step_to_dict(s));
  return out;
}

py::dict pullin_to_dict(const PullInResult& r) {
  py::dict d;
  d["v_low"] = r.v_pullin_low;
  d["v_high"] = r.v_pullin_high;
  d["tip_deflection"] = r.tip_deflection_at_last_converged;
  d["termination"] = to_string(r.termination);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Static pull-in analysis of electrostatically actuated microcantilevers";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NoPullInFound>(m, "NoPullInFound", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::enum_<Layout>(m, "Layout").value("InPlane", Layout::InPlane).value("OutOfPlane", Layout::OutOfPlane);
  py::enum_<FieldMethod>(m, "FieldMethod")
      .value("ParallelPlate", FieldMethod::ParallelPlate)
      .value("BEM", FieldMethod::BEM)
      .value("FEM", FieldMethod::FEM);
  py::enum_<CouplingMode>(m, "CouplingMode")
      .value("Iterative", CouplingMode::Iterative)
      .value("NonIncremental", CouplingMode::NonIncremental);

  py::class_<Material>(m, "Material")
      .def_readonly("name", &Material::name)
      .def_readonly("young_modulus", &Material::young_modulus)
      .def_readonly("poisson_ratio", &Material::poisson_ratio)
      .def_readonly("thermal_expansion", &Material::thermal_expansion);

  py::class_<Section>(m, "Section")
      .def_readonly("area", &Section::area)
      .def_readonly("second_moment", &Section::second_moment)
      .def_readonly("flexural_dim", &Section::flexural_dim)
      .def_readonly("depth", &Section::depth)
      .def_readonly("shear_correction", &Section::shear_correction);

  py::class_<Specimen>(m, "Specimen")
      .def_readonly("id", &Specimen::id)
      .def_readonly("layout", &Specimen::layout)
      .def_readonly("length", &Specimen::length)
      .def_readonly("width", &Specimen::width)
      .def_readonly("thickness", &Specimen::thickness)
      .def_readonly("gap", &Specimen::gap)
      .def_readonly("tip_offset", &Specimen::tip_offset)
      .def_readonly("counter_electrode_extent", &Specimen::counter_electrode_extent)
      .def_readonly("wafer_surface_present", &Specimen::wafer_surface_present)
      .def_readonly("material", &Specimen::material)
      .def_property_readonly("curvature_initial",
                             [](const Specimen& s) { return s.initial_state.curvature_initial; })
      .def("__eq__", [](const Specimen& a, const Specimen& b) { return a == b; })
      .def("__repr__", [](const Specimen& s) { return "<Specimen " + s.id + ">"; });

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("field_method", &SolverConfig::field_method)
      .def_readwrite("coupling_mode", &SolverConfig::coupling_mode)
      .def_readwrite("geometric_nonlinearity", &SolverConfig::geometric_nonlinearity)
      .def_readwrite("v_start", &SolverConfig::v_start)
      .def_readwrite("v_end", &SolverConfig::v_end)
      .def_readwrite("dv", &SolverConfig::dv)
      .def_readwrite("inner_tol", &SolverConfig::inner_tol)
      .def_readwrite("max_inner_iter", &SolverConfig::max_inner_iter)
      .def_readwrite("pullin_bisection_tol", &SolverConfig::pullin_bisection_tol)
      .def_readwrite("n_beam_elements", &SolverConfig::n_beam_elements)
      .def_readwrite("correction", &SolverConfig::correction)
      .def_readwrite("field_refinement", &SolverConfig::field_refinement);

  m.def("catalog", &load_catalog);
  m.def("find_in_catalog", &find_in_catalog, py::arg("id"));
  m.def("load_specimen", &load_specimen, py::arg("json_text"));
  m.def("serialize", &serialize, py::arg("specimen"));
  m.def("derive_section", &derive_section, py::arg("specimen"));
  m.def("curvature_from_tip_offset", &curvature_from_tip_offset, py::arg("tip_offset"),
        py::arg("length"));

  m.def(
      "voltage_sweep",
      [](const Specimen& s, const SolverConfig& cfg) {
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = voltage_sweep(s, cfg);
        }
        return sweep_to_list(r);
      },
      py::arg("specimen"), py::arg("config"));
  m.def(
      "find_pull_in",
      [](const Specimen& s, const SolverConfig& cfg) {
        PullInResult r;
        {
          py::gil_scoped_release release;
          r = find_pull_in(s, cfg);
        }
        return pullin_to_dict(r);
      },
      py::arg("specimen"), py::arg("config"));
  m.def(
      "find_lumped_pull_in",
      [](double k, double gap, double area, const SolverConfig& cfg) {
        return pullin_to_dict(find_pull_in(LumpedParameters{k, gap, area}, cfg));
      },
      py::arg("stiffness"), py::arg("gap"), py::arg("area"), py::arg("config"));
  m.def(
      "calibrate_correction",
      [](const Specimen& s, FieldMethod method) {
        const CorrectionFactors f = calibrate_correction(s, method);
        py::dict d;
        d["f_length"] = f.f_length;
        d["f_width"] = f.f_width;
        d["correction"] = f.correction;
        return d;
      },
      py::arg("specimen"), py::arg("method") = FieldMethod::BEM);
  m.def(
      "sweep_csv",
      [](const Specimen& s, const SolverConfig& cfg) {
        return sweep_csv(voltage_sweep(s, cfg), cfg.field_method != FieldMethod::ParallelPlate);
      },
      py::arg("specimen"), py::arg("config"));

  m.def(
      "lumped_pullin",
      [](double k, double gap, double area) {
        const auto r = oracles::lumped_pullin({k, gap, area});
        return py::make_tuple(r.v_pullin, r.u_pullin);
      },
      py::arg("stiffness"), py::arg("gap"), py::arg("area"));
  m.def(
      "ritz_pullin", [](const Specimen& s) { return oracles::ritz_pullin(s, s.material); },
      py::arg("specimen"));
  m.def("elastica_tip", &oracles::elastica_tip, py::arg("load"), py::arg("length"),
        py::arg("flexural_rigidity"));
  m.attr("__version__") = tool_version();
}
