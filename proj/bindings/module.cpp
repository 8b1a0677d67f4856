#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ionsim/constants.hpp"
#include "ionsim/coupling.hpp"
#include "ionsim/crystal.hpp"
#include "ionsim/dynamics.hpp"
#include "ionsim/field.hpp"
#include "ionsim/modes.hpp"

namespace py = pybind11;
using namespace ionsim;

PYBIND11_MODULE(_core, m) {
  m.doc() = "trapped-ion crystal and spectroscopy simulator";

  py::class_<IonSpecies>(m, "IonSpecies")
      .def(py::init<>())
      .def_readwrite("mass", &IonSpecies::mass)
      .def_readwrite("charge", &IonSpecies::charge)
      .def_readwrite("lande_g", &IonSpecies::lande_g)
      .def_readwrite("delta_ms", &IonSpecies::delta_ms)
      .def_static("ca40", &IonSpecies::ca40);

  py::class_<TrapPotential>(m, "TrapPotential")
      .def(py::init<>())
      .def_readwrite("omega_x", &TrapPotential::omega_x)
      .def_readwrite("omega_y", &TrapPotential::omega_y)
      .def_readwrite("omega_z", &TrapPotential::omega_z)
      .def_readwrite("species", &TrapPotential::species)
      .def("alpha", &TrapPotential::alpha)
      .def("length_scale", &TrapPotential::length_scale);

  py::enum_<CrystalConfiguration>(m, "CrystalConfiguration")
      .value("linear", CrystalConfiguration::linear)
      .value("zigzag", CrystalConfiguration::zigzag)
      .value("planar", CrystalConfiguration::planar);

  py::class_<CrystalState>(m, "CrystalState")
      .def_readonly("n", &CrystalState::n)
      .def_readonly("positions", &CrystalState::positions)
      .def_readonly("energy", &CrystalState::energy)
      .def_readonly("configuration", &CrystalState::configuration)
      .def_readonly("near_critical", &CrystalState::near_critical)
      .def_readonly("length_scale", &CrystalState::length_scale);

  py::class_<AnisotropyResult>(m, "AnisotropyResult")
      .def_readonly("alpha", &AnisotropyResult::alpha)
      .def_readonly("alpha_crit", &AnisotropyResult::alpha_crit)
      .def_readonly("is_supercritical", &AnisotropyResult::is_supercritical);

  py::class_<ModeSpectrum>(m, "ModeSpectrum")
      .def_readonly("n_ions", &ModeSpectrum::n_ions)
      .def_readonly("n_modes", &ModeSpectrum::n_modes)
      .def_readonly("frequencies", &ModeSpectrum::frequencies)
      .def_readonly("eigenvectors", &ModeSpectrum::eigenvectors)
      .def("component", &ModeSpectrum::component);

  py::class_<WireSegment>(m, "WireSegment")
      .def(py::init<>())
      .def_readwrite("anchor", &WireSegment::anchor)
      .def_readwrite("direction", &WireSegment::direction)
      .def_readwrite("length", &WireSegment::length)
      .def_readwrite("current", &WireSegment::current);

  py::class_<FieldModel>(m, "FieldModel")
      .def_static("linear_gradient", &FieldModel::linear_gradient, py::arg("bias"),
                  py::arg("magnitude"), py::arg("direction"))
      .def_static("wire_model", &FieldModel::wire_model, py::arg("segments"), py::arg("bias"));

  py::class_<CouplingMatrix>(m, "CouplingMatrix")
      .def_readonly("eta", &CouplingMatrix::eta)
      .def_readonly("ion_gradients", &CouplingMatrix::ion_gradients)
      .def_readonly("gradient_used", &CouplingMatrix::gradient_used)
      .def_readonly("direction", &CouplingMatrix::direction);

  py::enum_<Transition>(m, "Transition")
      .value("carrier", Transition::carrier)
      .value("rsb", Transition::rsb)
      .value("bsb", Transition::bsb);

  py::class_<PhononDistribution>(m, "PhononDistribution")
      .def_static("fock", &PhononDistribution::fock)
      .def_static("thermal", &PhononDistribution::thermal)
      .def_static("coherent", &PhononDistribution::coherent);

  py::class_<DriveParams>(m, "DriveParams")
      .def(py::init<>())
      .def_readwrite("rabi_frequency", &DriveParams::rabi_frequency)
      .def_readwrite("detuning", &DriveParams::detuning)
      .def_readwrite("pulse_time", &DriveParams::pulse_time)
      .def_readwrite("decay_time", &DriveParams::decay_time);

  m.def("characteristic_length", &characteristic_length, py::arg("species"), py::arg("omega_z"));
  m.def("ground_state_size", py::overload_cast<const IonSpecies&, double>(&ground_state_size),
        py::arg("species"), py::arg("omega"));
  m.def("find_equilibrium", &find_equilibrium, py::arg("trap"), py::arg("n"), py::arg("seed") = 1);
  m.def("critical_anisotropy", &critical_anisotropy, py::arg("trap"), py::arg("n"));
  m.def("normal_modes", &normal_modes, py::arg("state"), py::arg("trap"));
  m.def("field_at", &field_at, py::arg("model"), py::arg("point"));
  m.def("magnitude_gradient", &magnitude_gradient, py::arg("model"), py::arg("point"),
        py::arg("direction"));
  m.def("zeeman_frequency", &zeeman_frequency, py::arg("species"), py::arg("b_magnitude"));
  m.def("parse_wire_file", &parse_wire_file, py::arg("path"));
  m.def("effective_lamb_dicke", &effective_lamb_dicke, py::arg("spectrum"), py::arg("field"),
        py::arg("state"), py::arg("species"),
        py::arg("direction") = Eigen::Vector3d::UnitX().eval());
  m.def("laser_lamb_dicke", &laser_lamb_dicke, py::arg("k_eff"), py::arg("projection"),
        py::arg("species"), py::arg("omega"));
  m.def("sideband_rabi", &sideband_rabi, py::arg("n"), py::arg("eta"), py::arg("omega_rabi"));
  m.def("transition_rabi", &transition_rabi, py::arg("transition"), py::arg("n"), py::arg("eta"),
        py::arg("omega_rabi"));
  m.def("flop_signal", &flop_signal, py::arg("dist"), py::arg("eta"), py::arg("drive"),
        py::arg("transition"), py::arg("t_grid"));
}
