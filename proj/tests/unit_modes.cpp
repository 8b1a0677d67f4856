#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ionsim/constants.hpp"
#include "ionsim/crystal.hpp"
#include "ionsim/errors.hpp"
#include "ionsim/modes.hpp"
#include "oracles.hpp"

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

// eigenvectors are defined up to an overall sign
double sign_free_inf_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::min((a - b).cwiseAbs().maxCoeff(), (a + b).cwiseAbs().maxCoeff());
}

int closest_mode(const ModeSpectrum& s, double omega) {
  int best = 0;
  for (int k = 1; k < s.n_modes; ++k)
    if (std::abs(s.frequencies[k] - omega) < std::abs(s.frequencies[best] - omega)) best = k;
  return best;
}

}  // namespace

TEST_CASE("hessian: single ion is the bare trap curvature") {
  const TrapPotential trap = make_trap(2.0, 2.2, 0.5);
  const CrystalState s = find_equilibrium(trap, 1);
  const Eigen::MatrixXd h = hessian(s, trap);
  const double m = trap.species.mass;
  CHECK(h(0, 0) == doctest::Approx(m * trap.omega_x * trap.omega_x).epsilon(1e-10));
  CHECK(h(1, 1) == doctest::Approx(m * trap.omega_y * trap.omega_y).epsilon(1e-10));
  CHECK(h(2, 2) == doctest::Approx(m * trap.omega_z * trap.omega_z).epsilon(1e-10));
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12 * h.cwiseAbs().maxCoeff());
}

TEST_CASE("hessian agrees with finite differences of the energy") {
  const TrapPotential trap = make_trap(1.75, 2.9, 1.75 * std::sqrt(0.42));
  const CrystalState s = find_equilibrium(trap, 3);
  const int n = s.n;
  auto energy_flat = [&](const Eigen::VectorXd& v) {
    Eigen::MatrixX3d pos(n, 3);
    for (int axis = 0; axis < 3; ++axis)
      for (int i = 0; i < n; ++i) pos(i, axis) = v[axis * n + i];
    return potential_energy(pos, trap);
  };
  Eigen::VectorXd q0(3 * n);
  for (int axis = 0; axis < 3; ++axis)
    for (int i = 0; i < n; ++i) q0[axis * n + i] = s.positions(i, axis);
  const Eigen::MatrixXd h = hessian(s, trap);
  const Eigen::MatrixXd h_fd = oracles::fd_hessian(energy_flat, q0, 3e-9);
  CHECK((h - h_fd).norm() < 2e-5 * h.norm());
}

TEST_CASE("two-ion mode frequencies in closed form") {
  const TrapPotential trap = make_trap(2.0, 2.2, 0.5);
  const ModeSpectrum sp = normal_modes(find_equilibrium(trap, 2), trap);
  REQUIRE(sp.n_modes == 6);
  const double wx = trap.omega_x, wy = trap.omega_y, wz = trap.omega_z;
  std::vector<double> expected = {wz,
                                  std::sqrt(3.0) * wz,
                                  wx,
                                  std::sqrt(wx * wx - wz * wz),
                                  wy,
                                  std::sqrt(wy * wy - wz * wz)};
  std::sort(expected.begin(), expected.end());
  for (int k = 0; k < 6; ++k)
    CHECK(sp.frequencies[k] == doctest::Approx(expected[k]).epsilon(1e-9));
  for (int k = 1; k < 6; ++k) CHECK(sp.frequencies[k] >= sp.frequencies[k - 1]);
}

TEST_CASE("three-ion chain mode frequencies in closed form") {
  const TrapPotential trap = make_trap(2.0, 2.6, 0.5);
  const ModeSpectrum sp = normal_modes(find_equilibrium(trap, 3), trap);
  REQUIRE(sp.n_modes == 9);
  const double wx = trap.omega_x, wy = trap.omega_y, wz = trap.omega_z;
  std::vector<double> expected = {wz,
                                  std::sqrt(3.0) * wz,
                                  std::sqrt(29.0 / 5.0) * wz,
                                  wx,
                                  std::sqrt(wx * wx - wz * wz),
                                  std::sqrt(wx * wx - 2.4 * wz * wz),
                                  wy,
                                  std::sqrt(wy * wy - wz * wz),
                                  std::sqrt(wy * wy - 2.4 * wz * wz)};
  std::sort(expected.begin(), expected.end());
  for (int k = 0; k < 9; ++k)
    CHECK(sp.frequencies[k] == doctest::Approx(expected[k]).epsilon(1e-9));
}

TEST_CASE("three-ion radial eigenvectors") {
  const TrapPotential trap = make_trap(2.0, 2.6, 0.5);
  const ModeSpectrum sp = normal_modes(find_equilibrium(trap, 3), trap);
  const double wx = trap.omega_x, wz = trap.omega_z;
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);

  struct Want {
    double omega;
    Eigen::Vector3d shape;
  };
  const std::vector<Want> wanted = {
      {wx, {1.0 / s3, 1.0 / s3, 1.0 / s3}},
      {std::sqrt(wx * wx - wz * wz), {1.0 / s2, 0.0, -1.0 / s2}},
      {std::sqrt(wx * wx - 2.4 * wz * wz), {1.0 / s6, -2.0 / s6, 1.0 / s6}}};
  for (const Want& w : wanted) {
    const int k = closest_mode(sp, w.omega);
    Eigen::VectorXd xs(3);
    for (int ion = 0; ion < 3; ++ion) {
      xs[ion] = sp.component(k, ion, 0);
      CHECK(std::abs(sp.component(k, ion, 1)) < 1e-10);
      CHECK(std::abs(sp.component(k, ion, 2)) < 1e-10);
    }
    CHECK(sign_free_inf_diff(xs, w.shape) < 1e-6);
  }
}

TEST_CASE("eigenvector sign convention and layout accessor") {
  const TrapPotential trap = make_trap(2.0, 2.6, 0.5);
  const ModeSpectrum sp = normal_modes(find_equilibrium(trap, 3), trap);
  for (int k = 0; k < sp.n_modes; ++k) {
    int arg = 0;
    for (int j = 1; j < sp.n_modes; ++j)
      if (std::abs(sp.eigenvectors(k, j)) > std::abs(sp.eigenvectors(k, arg))) arg = j;
    CHECK(sp.eigenvectors(k, arg) > 0.0);
  }
  CHECK(sp.component(2, 1, 2) == sp.eigenvectors(2, 2 * 3 + 1));
}

TEST_CASE("orthonormality and the trace sum rule") {
  const TrapPotential trap = make_trap(1.75, 2.9, 1.75 * std::sqrt(0.42));
  const CrystalState s = find_equilibrium(trap, 3);
  const ModeSpectrum sp = normal_modes(s, trap);
  const Eigen::MatrixXd gram = sp.eigenvectors * sp.eigenvectors.transpose();
  CHECK((gram - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-10);
  const double trace = hessian(s, trap).trace() / trap.species.mass;
  CHECK(sp.frequencies.squaredNorm() == doctest::Approx(trace).epsilon(1e-10));
}

TEST_CASE("center-of-mass modes sit at the bare trap frequencies") {
  const TrapPotential trap = make_trap(1.75, 2.9, 1.75 * std::sqrt(0.42));
  const ModeSpectrum sp = normal_modes(find_equilibrium(trap, 3), trap);
  const double bare[3] = {trap.omega_x, trap.omega_y, trap.omega_z};
  for (int axis = 0; axis < 3; ++axis) {
    const int k = closest_mode(sp, bare[axis]);
    CHECK(sp.frequencies[k] == doctest::Approx(bare[axis]).epsilon(1e-9));
    for (int ion = 0; ion < 3; ++ion)
      CHECK(sp.component(k, ion, axis) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-7));
  }
}

TEST_CASE("unstable configuration is rejected with the offending mode") {
  const TrapPotential trap = make_trap(1.75, 2.9, 1.75 * std::sqrt(0.5));
  CrystalState s;
  s.n = 3;
  s.length_scale = trap.length_scale();
  s.positions = Eigen::MatrixX3d::Zero(3, 3);
  const Eigen::VectorXd z = detail::chain_axial_positions(3) * s.length_scale;
  for (int i = 0; i < 3; ++i) s.positions(i, 2) = z[i];
  s.converged = true;
  s.configuration = CrystalConfiguration::linear;
  try {
    normal_modes(s, trap);
    FAIL("expected an instability");
  } catch (const InstabilityError& e) {
    CHECK(e.eigenvalue < 0.0);
    CHECK(e.mode_index >= 0);
    CHECK(e.mode_index < 9);
  }
}

TEST_CASE("mode labels, ranks, and per-ion visibility") {
  const TrapPotential trap = make_trap(2.0, 2.6, 0.5);
  const ModeSpectrum sp = normal_modes(find_equilibrium(trap, 3), trap);
  const std::vector<int> roi = {0, 1, 2};
  const auto labels = classify_modes(sp, roi, Eigen::Vector3d::UnitX());
  REQUIRE(labels.size() == 9);

  auto find_label = [&](const std::string& name) -> const ModeLabel& {
    for (const auto& l : labels)
      if (l.name == name) return l;
    FAIL("missing label " << name);
    return labels.front();
  };

  const ModeLabel& xcom = find_label("x-com");
  CHECK(xcom.is_com);
  CHECK(xcom.axis == ModeAxis::x);
  CHECK(sp.frequencies[xcom.mode] == doctest::Approx(trap.omega_x).epsilon(1e-9));
  CHECK(xcom.visible == std::vector<bool>{true, true, true});

  const ModeLabel& x1 = find_label("x1");
  CHECK(x1.rank == 1);
  CHECK(sp.frequencies[x1.mode] ==
        doctest::Approx(std::sqrt(trap.omega_x * trap.omega_x - trap.omega_z * trap.omega_z))
            .epsilon(1e-9));
  CHECK(x1.visible == std::vector<bool>{true, false, true});

  const ModeLabel& x2 = find_label("x2");
  CHECK(x2.rank == 2);
  CHECK(x2.visible == std::vector<bool>{true, true, true});

  // gradient along x leaves every y and z mode invisible
  for (const auto& l : labels)
    if (l.axis == ModeAxis::y || l.axis == ModeAxis::z)
      for (bool v : l.visible) CHECK_FALSE(v);

  CHECK_THROWS_AS(classify_modes(sp, {}, Eigen::Vector3d::UnitX()), std::domain_error);
  CHECK_THROWS_AS(classify_modes(sp, {5}, Eigen::Vector3d::UnitX()), std::domain_error);
  CHECK_THROWS_AS(classify_modes(sp, roi, Eigen::Vector3d(1.0, 1.0, 0.0)), std::domain_error);
}

TEST_CASE("soft mode frequency across the transition") {
  const TrapPotential trap = make_trap(1.75, 2.9, 0.5);
  const auto curve = soft_mode_curve(trap, 3, {0.40, 0.42});
  REQUIRE(curve.size() == 2);
  REQUIRE(curve[0].valid);
  REQUIRE(curve[1].valid);
  // linear side: omega_x sqrt(1 - 2.4 alpha)
  CHECK(curve[0].omega_soft == doctest::Approx(0.2 * trap.omega_x).epsilon(1e-7));
  CHECK(curve[0].omega_soft == doctest::Approx(two_pi * 350e3).epsilon(1e-7));
  // zigzag side softens again near the transition
  CHECK(std::abs(curve[1].omega_soft / two_pi - 225e3) < 22.5e3);
  CHECK(curve[1].omega_soft == doctest::Approx(two_pi * 218.1e3).epsilon(0.01));
}

TEST_CASE("soft mode approaches the bare radial frequency for small anisotropy") {
  const TrapPotential trap = make_trap(1.75, 2.9, 0.5);
  const auto curve = soft_mode_curve(trap, 3, {0.01});
  REQUIRE(curve[0].valid);
  CHECK(std::abs(curve[0].omega_soft - trap.omega_x) < 0.015 * trap.omega_x);
}

TEST_CASE("soft mode curve is continuous through the transition") {
  const TrapPotential trap = make_trap(1.75, 2.9, 0.5);
  const std::vector<double> grid = {0.405, 0.4100, 0.4125, 0.4150, 0.4175, 0.4200, 0.425};
  const auto curve = soft_mode_curve(trap, 3, grid);
  for (const auto& e : curve) {
    REQUIRE(e.valid);
    CHECK(e.omega_soft > 0.0);
  }
  // The sqrt cusp at the critical point allows steps of order 100 kHz here;
  // a jump to a different mode branch would be an order of magnitude larger.
  for (std::size_t i = 1; i < curve.size(); ++i)
    CHECK(std::abs(curve[i].omega_soft - curve[i - 1].omega_soft) < two_pi * 250e3);
  CHECK_THROWS_AS(soft_mode_curve(trap, 3, {1.2}), std::domain_error);
}
