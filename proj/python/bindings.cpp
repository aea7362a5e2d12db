#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hmorse/errors.hpp"
#include "hmorse/io.hpp"

namespace py = pybind11;
using namespace hmorse;

namespace {

py::dict report_dict(const IndexReport& rep) {
  // same layout as the JSON report
  const auto json = py::module_::import("json");
  return json.attr("loads")(io::dump_json(io::to_json(rep)));
}

}  // namespace

PYBIND11_MODULE(_hmorse, m) {
  m.doc() = "Central configurations and Maslov/Morse indices of homothetic colliding orbits";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NoConvergenceError>(m, "NoConvergenceError", base.ptr());
  py::register_exception<NotCentralError>(m, "NotCentralError", base.ptr());
  py::register_exception<CollisionError>(m, "CollisionError", base.ptr());
  py::register_exception<IntegratorError>(m, "IntegratorError", base.ptr());
  py::register_exception<IndexMismatchError>(m, "IndexMismatchError", base.ptr());

  py::class_<MassSystem>(m, "MassSystem")
      .def(py::init<std::vector<double>, int>(), py::arg("masses"), py::arg("dim"))
      .def_property_readonly("masses", &MassSystem::masses)
      .def_property_readonly("dim", &MassSystem::dim)
      .def_property_readonly("n_bodies", &MassSystem::n_bodies)
      .def_property_readonly("n_star", &MassSystem::n_star);

  m.def("potential", py::overload_cast<const MassSystem&, const Vec&>(&potential));
  m.def("grad_potential", py::overload_cast<const MassSystem&, const Vec&>(&grad_potential));
  m.def("hess_potential", py::overload_cast<const MassSystem&, const Vec&>(&hess_potential));
  m.def("moment_of_inertia", py::overload_cast<const MassSystem&, const Vec&>(&moment_of_inertia));

  py::enum_<SpiralTag>(m, "SpiralTag")
      .value("Spiral", SpiralTag::Spiral)
      .value("NonSpiralBoundary", SpiralTag::NonSpiralBoundary)
      .value("NonSpiralStrict", SpiralTag::NonSpiralStrict);

  py::class_<SpiralClass>(m, "SpiralClass")
      .def_readonly("tag", &SpiralClass::tag)
      .def_readonly("margin", &SpiralClass::margin);

  py::class_<CentralConfiguration>(m, "CentralConfiguration")
      .def_readonly("system", &CentralConfiguration::system)
      .def_readonly("shape", &CentralConfiguration::shape)
      .def_readonly("b", &CentralConfiguration::b_value)
      .def_readonly("residual_norm", &CentralConfiguration::residual_norm)
      .def_readonly("spectrum", &CentralConfiguration::spectrum)
      .def_readonly("classification", &CentralConfiguration::classification)
      .def_readonly("iterations", &CentralConfiguration::iterations)
      .def("to_json", [](const CentralConfiguration& cc) { return io::dump_json(io::to_json(cc)); });

  m.def("find_cc", [](const MassSystem& sys, const Vec& guess) { return find_cc(sys, guess); },
        py::arg("system"), py::arg("guess"));
  m.def("preset_names", &preset_names);
  m.def(
      "preset_cc",
      [](const std::string& name) {
        const Preset p = preset(name);
        return find_cc(p.system, p.guess);
      },
      py::arg("name"), "Central configuration of a named preset.");
  m.def("classify", [](const std::vector<double>& spectrum, double b) { return classify(spectrum, b); },
        py::arg("spectrum"), py::arg("b"));

  py::class_<HomotheticOrbit>(m, "HomotheticOrbit")
      .def_static("apex", &HomotheticOrbit::apex, py::arg("cc"), py::arg("h0"))
      .def_static("standard", &HomotheticOrbit::standard, py::arg("cc"), py::arg("h0"))
      .def_static("from_radius", &HomotheticOrbit::from_radius, py::arg("cc"), py::arg("h0"),
                  py::arg("r0"))
      .def_static("synthetic", &HomotheticOrbit::synthetic, py::arg("b"), py::arg("spectrum"),
                  py::arg("h0"), py::arg("r0") = 0.0)
      .def_property_readonly("b", &HomotheticOrbit::b)
      .def_property_readonly("h0", &HomotheticOrbit::h0)
      .def_property_readonly("r0", [](const HomotheticOrbit& o) { return o.radial.r0; })
      .def_property_readonly("v0", [](const HomotheticOrbit& o) { return o.radial.v0; })
      .def_readonly("n_star", &HomotheticOrbit::n_star)
      .def_readonly("spectrum", &HomotheticOrbit::spectrum)
      .def_readonly("classification", &HomotheticOrbit::classification)
      .def("collision_time", [](const HomotheticOrbit& o) { return orbit_collision_time(o.radial); });

  m.def(
      "maslov_profile",
      [](const HomotheticOrbit& o, const std::vector<double>& horizons) {
        return geometrical_index(o, horizons).mu_total;
      },
      py::arg("orbit"), py::arg("horizons"), "Maslov index of the orbit at each tau horizon.");
  m.def("galerkin_count", &galerkin_count, py::arg("orbit"), py::arg("t_phys"), py::arg("m") = 64);
  m.def(
      "index_theorem_check",
      [](const HomotheticOrbit& o, const std::vector<double>& t_grid, int m) {
        py::list rows;
        for (const auto& r : index_theorem_check(o, t_grid, m)) {
          rows.append(py::dict(py::arg("t_phys") = r.t_phys, py::arg("galerkin") = r.galerkin,
                               py::arg("maslov") = r.maslov, py::arg("n_star") = r.n_star,
                               py::arg("pass") = r.pass));
        }
        return rows;
      },
      py::arg("orbit"), py::arg("t_grid"), py::arg("m") = 64);
  m.def(
      "verdict",
      [](const HomotheticOrbit& o, const std::vector<double>& horizons) {
        return report_dict(theorem_a_verdict(o, horizons));
      },
      py::arg("orbit"), py::arg("horizons"), "Index report as a dict (JSON report layout).");
}
