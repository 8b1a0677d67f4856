#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ionsim/constants.hpp"

namespace ionsim {

struct WireSegment {
  Eigen::Vector3d anchor = Eigen::Vector3d::Zero();   // m
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();  // unit vector
  double length = std::numeric_limits<double>::infinity();  // m; infinite allowed
  double current = 0.0;  // A

  void validate();  // normalizes direction, checks length/current
};

// Uniform bias plus either an analytic linear gradient or Biot-Savart wires.
struct FieldModel {
  enum class Kind { analytic, wires };

  Kind kind = Kind::analytic;
  Eigen::Vector3d bias = Eigen::Vector3d::Zero();     // T
  Eigen::Matrix3d tensor = Eigen::Matrix3d::Zero();   // T/m, dB_i/dr_j (analytic only)
  std::vector<WireSegment> segments;

  // Tensor must be symmetric and traceless (Maxwell, current-free region).
  static FieldModel analytic(const Eigen::Vector3d& bias, const Eigen::Matrix3d& tensor);
  // Maxwell-legal tensor with d|B|/d(direction) = magnitude at the origin.
  static FieldModel linear_gradient(const Eigen::Vector3d& bias, double magnitude,
                                    const Eigen::Vector3d& direction);
  static FieldModel wire_model(std::vector<WireSegment> segments, const Eigen::Vector3d& bias);
};

Eigen::Vector3d field_at(const FieldModel& model, const Eigen::Vector3d& point);

// dB_i/dr_j of the total field. Analytic for wire models as well.
Eigen::Matrix3d gradient_at(const FieldModel& model, const Eigen::Vector3d& point);

// Directional derivative of |B| (bias included) along a unit vector.
double magnitude_gradient(const FieldModel& model, const Eigen::Vector3d& point,
                          const Eigen::Vector3d& direction);

// omega_a = delta_mS * g * mu_B * |B| / hbar
double zeeman_frequency(const IonSpecies& species, double b_magnitude);

// Zero of the wire-only field inside the box, by Newton iteration.
Eigen::Vector3d quadrupole_center(const FieldModel& model, const Eigen::Vector3d& box_lo,
                                  const Eigen::Vector3d& box_hi);

// Least-squares slope of Zeeman splitting vs ion separation, converted to T/m.
double axial_gradient_bound(const IonSpecies& species, const std::vector<double>& spacings,
                            const std::vector<double>& splittings);

// Text format: "# wires v1" header, then rows "ax ay az dx dy dz length current"
// in SI units; length may be "inf". Throws ConfigError with a line number.
std::vector<WireSegment> parse_wire_file(const std::string& path);

}  // namespace ionsim
