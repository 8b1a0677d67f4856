#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"
#include "ionsim/field.hpp"

using namespace ionsim;

namespace {

WireSegment wire(const Eigen::Vector3d& anchor, const Eigen::Vector3d& dir, double length,
                 double current) {
  WireSegment w;
  w.anchor = anchor;
  w.direction = dir;
  w.length = length;
  w.current = current;
  return w;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

FieldModel three_wires() {
  std::vector<WireSegment> ws = {
      wire({0.0, -300e-6, 0.0}, Eigen::Vector3d::UnitX(), kInf, 5.8),
      wire({0.0, 0.0, 0.0}, Eigen::Vector3d::UnitX(), kInf, -4.8),
      wire({0.0, 300e-6, 0.0}, Eigen::Vector3d::UnitX(), kInf, 8.3)};
  return FieldModel::wire_model(ws, Eigen::Vector3d::Zero());
}

double fd_magnitude_gradient(const FieldModel& m, const Eigen::Vector3d& p,
                             const Eigen::Vector3d& dir, double h) {
  return (field_at(m, p + h * dir).norm() - field_at(m, p - h * dir).norm()) / (2.0 * h);
}

}  // namespace

TEST_CASE("single infinite wire: closed-form magnitude and falloff") {
  const FieldModel m = FieldModel::wire_model(
      {wire(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ(), kInf, 1.0)},
      Eigen::Vector3d::Zero());
  const Eigen::Vector3d p(100e-6, 0.0, 0.0);
  const Eigen::Vector3d b = field_at(m, p);
  CHECK(b.norm() == doctest::Approx(2.0e-3).epsilon(1e-9));
  // field circulates: along +y at +x for current along +z
  CHECK(b[1] == doctest::Approx(2.0e-3).epsilon(1e-9));
  CHECK(std::abs(b[0]) < 1e-15);
  CHECK(std::abs(b[2]) < 1e-15);
  const double g = magnitude_gradient(m, p, Eigen::Vector3d::UnitX());
  CHECK(g == doctest::Approx(-20.0).epsilon(1e-9));
  CHECK(std::abs(g) == doctest::Approx(b.norm() / p.norm()).epsilon(1e-9));
}

TEST_CASE("finite segment approaches the infinite wire") {
  const FieldModel inf_wire = FieldModel::wire_model(
      {wire(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ(), kInf, 1.3)},
      Eigen::Vector3d::Zero());
  const FieldModel finite = FieldModel::wire_model(
      {wire({0.0, 0.0, -1.0}, Eigen::Vector3d::UnitZ(), 2.0, 1.3)}, Eigen::Vector3d::Zero());
  const Eigen::Vector3d p(70e-6, 40e-6, 0.0);
  const Eigen::Vector3d a = field_at(inf_wire, p);
  const Eigen::Vector3d b = field_at(finite, p);
  CHECK((a - b).norm() < 1e-6 * a.norm());
}

TEST_CASE("wire fields superpose and scale linearly with current") {
  const FieldModel m = three_wires();
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-450e-6, 450e-6);
  for (int it = 0; it < 20; ++it) {
    const Eigen::Vector3d p(u(rng), u(rng), std::abs(u(rng)) + 40e-6);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& w : m.segments)
      sum += field_at(FieldModel::wire_model({w}, Eigen::Vector3d::Zero()), p);
    CHECK((field_at(m, p) - sum).norm() < 1e-12 * sum.norm() + 1e-18);

    auto scaled = m;
    for (auto& w : scaled.segments) w.current *= 3.0;
    CHECK((field_at(scaled, p) - 3.0 * field_at(m, p)).norm() < 1e-12 * sum.norm() + 1e-18);
  }
}

TEST_CASE("zero current leaves only the bias") {
  const Eigen::Vector3d bias(1e-4, -2e-4, 5e-5);
  const FieldModel m = FieldModel::wire_model(
      {wire(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX(), kInf, 0.0)}, bias);
  CHECK((field_at(m, {1e-4, 2e-4, -3e-4}) - bias).norm() == 0.0);
}

TEST_CASE("probe point on the wire axis is rejected") {
  const FieldModel m = FieldModel::wire_model(
      {wire(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ(), kInf, 1.0)},
      Eigen::Vector3d::Zero());
  CHECK_THROWS_AS(field_at(m, {0.0, 0.0, 0.3}), SingularityError);
}

TEST_CASE("wire-model gradient: Maxwell structure and finite differences") {
  const FieldModel m = three_wires();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-400e-6, 400e-6);
  int checked = 0;
  while (checked < 100) {
    const Eigen::Vector3d p(u(rng), u(rng), u(rng));
    bool ok = true;
    for (const auto& w : m.segments)
      if ((p - w.anchor).cross(w.direction).norm() < 30e-6) ok = false;
    if (!ok) continue;
    ++checked;
    const Eigen::Matrix3d g = gradient_at(m, p);
    const double scale = g.cwiseAbs().maxCoeff();
    CHECK(std::abs(g.trace()) < 1e-9 * scale);
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-9 * scale);
    const double h = 1e-9;
    for (int a = 0; a < 3; ++a) {
      Eigen::Vector3d dp = Eigen::Vector3d::Zero();
      dp[a] = h;
      const Eigen::Vector3d col = (field_at(m, p + dp) - field_at(m, p - dp)) / (2.0 * h);
      CHECK((g.col(a) - col).norm() < 1e-6 * scale + 1e-18);
    }
  }
}

TEST_CASE("magnitude gradient matches a finite difference") {
  const FieldModel m = three_wires();
  const Eigen::Vector3d p(0.0, 0.0, 285e-6);
  for (const Eigen::Vector3d& dir :
       {Eigen::Vector3d::UnitX().eval(), Eigen::Vector3d::UnitY().eval(),
        Eigen::Vector3d(0.0, 0.6, 0.8)}) {
    const double g = magnitude_gradient(m, p, dir);
    CHECK(g == doctest::Approx(fd_magnitude_gradient(m, p, dir, 1e-9)).epsilon(1e-6));
  }
}

TEST_CASE("three-wire layout: gradient scale at the trap position") {
  const FieldModel m = three_wires();
  const Eigen::Vector3d p(0.0, 0.0, 285e-6);
  const Eigen::Vector3d b = field_at(m, p);
  const Eigen::Vector3d grad_mag = gradient_at(m, p).transpose() * b.normalized();
  CHECK(grad_mag.norm() > 8.0);
  CHECK(grad_mag.norm() < 24.0);
}

TEST_CASE("analytic linear-gradient model") {
  const Eigen::Vector3d bias(0.0, 0.0, 3.5e-4);
  const FieldModel m = FieldModel::linear_gradient(bias, 16.3, Eigen::Vector3d::UnitX());
  CHECK((field_at(m, Eigen::Vector3d::Zero()) - bias).norm() == 0.0);
  CHECK(magnitude_gradient(m, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX()) ==
        doctest::Approx(16.3).epsilon(1e-12));
  const Eigen::Matrix3d g = gradient_at(m, {1e-5, -2e-5, 3e-5});
  CHECK(std::abs(g.trace()) < 1e-12 * g.cwiseAbs().maxCoeff());
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-12 * g.cwiseAbs().maxCoeff());

  Eigen::Matrix3d bad = Eigen::Matrix3d::Zero();
  bad(0, 1) = 1.0;  // not symmetric
  CHECK_THROWS_AS(FieldModel::analytic(bias, bad), std::domain_error);
  Eigen::Matrix3d traced = Eigen::Matrix3d::Identity();
  CHECK_THROWS_AS(FieldModel::analytic(bias, traced), std::domain_error);
}

TEST_CASE("zeeman splitting") {
  const IonSpecies ca = IonSpecies::ca40();
  const double w = zeeman_frequency(ca, 3.5e-4);
  const double expected = ca.delta_ms * ca.lande_g * PhysicalConstants::bohr_magneton * 3.5e-4 /
                          PhysicalConstants::hbar;
  CHECK(w == doctest::Approx(expected).epsilon(1e-12));
  CHECK(w / two_pi == doctest::Approx(9.8078e6).epsilon(1e-3));
  CHECK(zeeman_frequency(ca, 7.0e-4) == doctest::Approx(2.0 * w).epsilon(1e-12));
  CHECK(zeeman_frequency(ca, 0.0) == 0.0);
}

TEST_CASE("field zero of an asymmetric wire set against a grid search") {
  const FieldModel m = three_wires();
  // coarse independent scan in the transverse plane
  double best = 1e9;
  double by = 0.0, bz = 0.0;
  for (double y = -420e-6; y <= 420e-6; y += 4e-6) {
    for (double z = 60e-6; z <= 400e-6; z += 4e-6) {
      const double mag = field_at(m, {0.0, y, z}).norm();
      if (mag < best) {
        best = mag;
        by = y;
        bz = z;
      }
    }
  }
  REQUIRE(best < 2e-4);
  const Eigen::Vector3d lo(-50e-6, -420e-6, 60e-6);
  const Eigen::Vector3d hi(50e-6, 420e-6, 400e-6);
  const Eigen::Vector3d c = quadrupole_center(m, lo, hi);
  CHECK(std::abs(c[1] - by) < 6e-6);
  CHECK(std::abs(c[2] - bz) < 6e-6);
  CHECK(field_at(m, c).norm() < 1e-12);
}

TEST_CASE("field zero translates with the wires") {
  FieldModel m = three_wires();
  const Eigen::Vector3d c0 = quadrupole_center(m, {-50e-6, -420e-6, 60e-6},
                                               {50e-6, 420e-6, 400e-6});
  const Eigen::Vector3d shift(0.0, 70e-6, -30e-6);
  FieldModel moved = m;
  for (auto& w : moved.segments) w.anchor += shift;
  const Eigen::Vector3d c1 = quadrupole_center(
      moved, Eigen::Vector3d(-50e-6, -420e-6, 60e-6) + shift,
      Eigen::Vector3d(50e-6, 420e-6, 400e-6) + shift);
  CHECK(std::abs(c1[1] - (c0[1] + shift[1])) < 1e-10);
  CHECK(std::abs(c1[2] - (c0[2] + shift[2])) < 1e-10);
}

TEST_CASE("no zero in the box raises") {
  const FieldModel m = FieldModel::wire_model(
      {wire(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX(), kInf, 1.0)},
      Eigen::Vector3d::Zero());
  CHECK_THROWS_AS(
      quadrupole_center(m, {1e-3, 1e-3, 1e-3}, {2e-3, 2e-3, 2e-3}), NotFoundError);
}

TEST_CASE("axial gradient bound from splitting differences") {
  const IonSpecies ca = IonSpecies::ca40();
  const double slope = ca.delta_ms * ca.lande_g * PhysicalConstants::bohr_magneton /
                       PhysicalConstants::hbar;  // rad/s per tesla
  const double grad = 0.02;  // T/m
  std::vector<double> spacings, splittings;
  for (double d : {5.6e-6, 8.1e-6, 12.1e-6}) {
    spacings.push_back(d);
    splittings.push_back(slope * grad * d + slope * 2.3e-9);  // offset must not matter
  }
  CHECK(axial_gradient_bound(ca, spacings, splittings) == doctest::Approx(grad).epsilon(1e-6));

  std::vector<double> zero = {0.0, 0.0, 0.0};
  CHECK(axial_gradient_bound(ca, spacings, zero) == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<double> same_d = {5.6e-6, 5.6e-6};
  std::vector<double> sp2 = {1.0, 2.0};
  CHECK_THROWS_AS(axial_gradient_bound(ca, same_d, sp2), FitError);
}

TEST_CASE("wire layout file parsing") {
  const std::string path = "build_wires_test_tmp.txt";
  {
    std::ofstream out(path);
    out << "# wires v1\n";
    out << "# anchor xyz, direction xyz, length, current (SI)\n";
    out << "0 -300e-6 0   1 0 0   inf   5.8\n";
    out << "0 0 0         1 0 0   inf  -4.8\n";
    out << "0 300e-6 0    1 0 0   2.0   8.3\n";
  }
  const auto ws = parse_wire_file(path);
  REQUIRE(ws.size() == 3);
  CHECK(ws[0].current == 5.8);
  CHECK(ws[1].current == -4.8);
  CHECK(std::isinf(ws[0].length));
  CHECK(ws[2].length == 2.0);
  CHECK(ws[0].anchor[1] == doctest::Approx(-300e-6).epsilon(1e-14));
  std::remove(path.c_str());

  {
    std::ofstream out(path);
    out << "# not wires\n0 0 0 1 0 0 inf 1.0\n";
  }
  try {
    parse_wire_file(path);
    FAIL("expected a header error");
  } catch (const ConfigError& e) {
    CHECK(e.line == 1);
  }
  std::remove(path.c_str());

  {
    std::ofstream out(path);
    out << "# wires v1\n0 0 0 1 0 0 inf\n";
  }
  try {
    parse_wire_file(path);
    FAIL("expected a field-count error");
  } catch (const ConfigError& e) {
    CHECK(e.line == 2);
  }
  std::remove(path.c_str());

  CHECK_THROWS_AS(parse_wire_file("definitely_missing_file.txt"), ConfigError);
}

TEST_CASE("wire segment validation") {
  WireSegment w = wire(Eigen::Vector3d::Zero(), {0.0, 0.0, 0.0}, kInf, 1.0);
  CHECK_THROWS_AS(w.validate(), std::domain_error);
  WireSegment neg = wire(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX(), -1.0, 1.0);
  CHECK_THROWS_AS(neg.validate(), std::domain_error);
  WireSegment scaled = wire(Eigen::Vector3d::Zero(), {0.0, 0.0, 2.0}, kInf, 1.0);
  scaled.validate();
  CHECK(scaled.direction.norm() == doctest::Approx(1.0).epsilon(1e-14));
}
