#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ionsim/constants.hpp"
#include "ionsim/coupling.hpp"
#include "ionsim/crystal.hpp"
#include "ionsim/errors.hpp"
#include "ionsim/field.hpp"
#include "ionsim/modes.hpp"

using namespace ionsim;

namespace {

TrapPotential make_trap(double fx_mhz, double fy_mhz, double fz_mhz) {
  TrapPotential t;
  t.omega_x = two_pi * fx_mhz * 1e6;
  t.omega_y = two_pi * fy_mhz * 1e6;
  t.omega_z = two_pi * fz_mhz * 1e6;
  t.species = IonSpecies::ca40();
  return t;
}

struct SingleIon {
  TrapPotential trap;
  CrystalState state;
  ModeSpectrum spectrum;
};

SingleIon single_ion(double fx_mhz, double fy_mhz, double fz_mhz) {
  SingleIon s;
  s.trap = make_trap(fx_mhz, fy_mhz, fz_mhz);
  s.state = find_equilibrium(s.trap, 1);
  s.spectrum = normal_modes(s.state, s.trap);
  return s;
}

int mode_at(const ModeSpectrum& sp, double omega) {
  int best = 0;
  for (int k = 1; k < sp.n_modes; ++k)
    if (std::abs(sp.frequencies[k] - omega) < std::abs(sp.frequencies[best] - omega)) best = k;
  return best;
}

FieldModel x_gradient(double magnitude, double bias_x = 3.5e-4) {
  return FieldModel::linear_gradient({bias_x, 0.0, 0.0}, magnitude, Eigen::Vector3d::UnitX());
}

}  // namespace

TEST_CASE("gradient coupling: reference value at 16.3 T/m") {
  const SingleIon s = single_ion(2.02, 2.9, 0.89);
  const CouplingMatrix cm =
      effective_lamb_dicke(s.spectrum, x_gradient(16.3), s.state, s.trap.species);
  const int kx = mode_at(s.spectrum, s.trap.omega_x);
  CHECK(cm.eta(kx, 0) == doctest::Approx(1.2646e-3).epsilon(2e-4));
  CHECK(cm.gradient_used == doctest::Approx(16.3).epsilon(1e-12));
  CHECK(cm.ion_gradients[0] == doctest::Approx(16.3).epsilon(1e-12));
  CHECK((cm.direction - Eigen::Vector3d::UnitX()).norm() == 0.0);
}

TEST_CASE("modes orthogonal to the gradient do not couple") {
  const SingleIon s = single_ion(2.02, 2.9, 0.89);
  const CouplingMatrix cm =
      effective_lamb_dicke(s.spectrum, x_gradient(16.3), s.state, s.trap.species);
  const int ky = mode_at(s.spectrum, s.trap.omega_y);
  const int kz = mode_at(s.spectrum, s.trap.omega_z);
  CHECK(std::abs(cm.eta(ky, 0)) < 1e-18);
  CHECK(std::abs(cm.eta(kz, 0)) < 1e-18);
}

TEST_CASE("zero gradient gives zero coupling") {
  const SingleIon s = single_ion(2.02, 2.9, 0.89);
  const FieldModel flat =
      FieldModel::analytic({3.5e-4, 0.0, 0.0}, Eigen::Matrix3d::Zero());
  const CouplingMatrix cm = effective_lamb_dicke(s.spectrum, flat, s.state, s.trap.species);
  CHECK(cm.eta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coupling scales as omega^{-3/2} and linearly with the gradient") {
  const SingleIon a = single_ion(2.02, 2.9, 0.89);
  const SingleIon b = single_ion(8.0 * 2.02, 20.0, 0.89);
  const FieldModel f = x_gradient(16.3);
  const double ea = effective_lamb_dicke(a.spectrum, f, a.state, a.trap.species)
                        .eta(mode_at(a.spectrum, a.trap.omega_x), 0);
  const double eb = effective_lamb_dicke(b.spectrum, f, b.state, b.trap.species)
                        .eta(mode_at(b.spectrum, b.trap.omega_x), 0);
  CHECK(ea / eb == doctest::Approx(std::pow(8.0, 1.5)).epsilon(1e-12));

  const double e2 = effective_lamb_dicke(a.spectrum, x_gradient(32.6), a.state, a.trap.species)
                        .eta(mode_at(a.spectrum, a.trap.omega_x), 0);
  CHECK(e2 == doctest::Approx(2.0 * ea).epsilon(1e-12));
}

TEST_CASE("axial coupling at a realistic axial gradient stays small") {
  const SingleIon s = single_ion(2.02, 2.9, 1.0);
  const FieldModel f =
      FieldModel::linear_gradient({0.0, 0.0, 3.5e-4}, 0.02, Eigen::Vector3d::UnitZ());
  const CouplingMatrix cm =
      effective_lamb_dicke(s.spectrum, f, s.state, s.trap.species, Eigen::Vector3d::UnitZ());
  const int kz = mode_at(s.spectrum, s.trap.omega_z);
  CHECK(std::abs(cm.eta(kz, 0)) > 0.0);
  CHECK(std::abs(cm.eta(kz, 0)) <= 1e-5);
}

TEST_CASE("center-of-mass coupling is uniform across the chain") {
  const TrapPotential trap = make_trap(2.02, 2.9, 0.5);
  const CrystalState state = find_equilibrium(trap, 3);
  const ModeSpectrum sp = normal_modes(state, trap);
  // strong uniform bias keeps |B| variation across the chain negligible
  const CouplingMatrix cm =
      effective_lamb_dicke(sp, x_gradient(16.3, 100.0), state, trap.species);
  const int kx = mode_at(sp, trap.omega_x);
  CHECK(cm.eta(kx, 1) == doctest::Approx(cm.eta(kx, 0)).epsilon(1e-12));
  CHECK(cm.eta(kx, 2) == doctest::Approx(cm.eta(kx, 0)).epsilon(1e-12));
}

TEST_CASE("coupling signs follow the eigenvector") {
  const TrapPotential trap = make_trap(2.02, 2.9, 0.5);
  const CrystalState state = find_equilibrium(trap, 3);
  const ModeSpectrum sp = normal_modes(state, trap);
  const CouplingMatrix cm =
      effective_lamb_dicke(sp, x_gradient(16.3, 100.0), state, trap.species);
  const double tilt =
      std::sqrt(trap.omega_x * trap.omega_x - trap.omega_z * trap.omega_z);
  const int k = mode_at(sp, tilt);  // eigenvector (1, 0, -1)/sqrt(2)
  CHECK(cm.eta(k, 0) * cm.eta(k, 2) < 0.0);
  CHECK(std::abs(cm.eta(k, 1)) < 1e-10 * std::abs(cm.eta(k, 0)));
  CHECK(cm.eta(k, 0) / sp.component(k, 0, 0) ==
        doctest::Approx(cm.eta(k, 2) / sp.component(k, 2, 0)).epsilon(1e-9));
}

TEST_CASE("soft mode is rejected instead of diverging") {
  CrystalState state;
  state.n = 1;
  state.positions = Eigen::MatrixX3d::Zero(1, 3);
  state.converged = true;
  state.length_scale = 1e-5;
  ModeSpectrum sp;
  sp.n_ions = 1;
  sp.n_modes = 3;
  sp.frequencies = Eigen::Vector3d(1e-3, two_pi * 2.0e6, two_pi * 2.9e6);
  sp.eigenvectors = Eigen::Matrix3d::Identity();
  try {
    effective_lamb_dicke(sp, x_gradient(16.3), state, IonSpecies::ca40());
    FAIL("expected a divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.mode_index == 0);
  }
}

TEST_CASE("input validation") {
  const SingleIon s = single_ion(2.02, 2.9, 0.89);
  CHECK_THROWS_AS(effective_lamb_dicke(s.spectrum, x_gradient(16.3), s.state, s.trap.species,
                                       Eigen::Vector3d::Zero()),
                  std::invalid_argument);
  IonSpecies bad = IonSpecies::ca40();
  bad.mass = -1.0;
  CHECK_THROWS_AS(effective_lamb_dicke(s.spectrum, x_gradient(16.3), s.state, bad),
                  std::domain_error);
}

TEST_CASE("laser coupling constant") {
  const IonSpecies ca = IonSpecies::ca40();
  const double k729 = two_pi / 729e-9;
  const double w = two_pi * 2.02e6;
  const double eta = laser_lamb_dicke(k729, 1.0, ca, w);
  CHECK(eta == doctest::Approx(0.068).epsilon(0.02));
  CHECK(laser_lamb_dicke(k729, 0.0, ca, w) == 0.0);
  CHECK(laser_lamb_dicke(k729, 0.5, ca, w) == doctest::Approx(0.5 * eta).epsilon(1e-12));
  CHECK(laser_lamb_dicke(k729, 1.0, ca, 4.0 * w) == doctest::Approx(0.5 * eta).epsilon(1e-12));
  CHECK(laser_lamb_dicke(k729, -1.0, ca, w) == doctest::Approx(eta).epsilon(1e-12));
  CHECK_THROWS_AS(laser_lamb_dicke(k729, 1.0, ca, 0.0), std::invalid_argument);
}
