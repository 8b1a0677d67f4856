#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ionsim {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018. Values are frozen; golden numbers in the tests depend on them.
struct PhysicalConstants {
  static constexpr double hbar = 1.054571817e-34;             // J s
  static constexpr double bohr_magneton = 9.2740100783e-24;   // J/T
  static constexpr double elementary_charge = 1.602176634e-19;  // C
  static constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
  static constexpr double vacuum_permeability = 1.25663706212e-6;  // T m/A
  static constexpr double atomic_mass_unit = 1.66053906660e-27;    // kg

  // e^2/(4 pi eps0), J m
  static constexpr double coulomb_constant =
      elementary_charge * elementary_charge /
      (4.0 * std::numbers::pi * vacuum_permittivity);
};

struct IonSpecies {
  double mass = 0.0;      // kg
  double charge = 0.0;    // C
  double lande_g = 0.0;
  double delta_ms = 0.0;  // difference of magnetic quantum numbers of the two spin states

  void validate() const {
    if (!(mass > 0.0)) throw std::domain_error("ion species: mass must be > 0");
    if (!(charge > 0.0)) throw std::domain_error("ion species: charge must be > 0");
  }

  // 40Ca+ ground-state Zeeman qubit (m_S = -1/2 to +1/2).
  static IonSpecies ca40() {
    return {40.0 * PhysicalConstants::atomic_mass_unit,
            PhysicalConstants::elementary_charge, 2.00225664, 1.0};
  }
};

// Coulomb length scale l = (e^2 / (4 pi eps0 m omega_z^2))^{1/3}.
inline double characteristic_length(const IonSpecies& species, double omega_z) {
  species.validate();
  if (!(omega_z > 0.0)) throw std::domain_error("characteristic_length: omega_z must be > 0");
  return std::cbrt(PhysicalConstants::coulomb_constant / (species.mass * omega_z * omega_z));
}

// Ground-state wave-packet size x0 = sqrt(hbar / (2 m omega)).
inline double ground_state_size(const IonSpecies& species, double omega) {
  species.validate();
  if (!(omega > 0.0)) throw std::domain_error("ground_state_size: omega must be > 0");
  return std::sqrt(PhysicalConstants::hbar / (2.0 * species.mass * omega));
}

// Thermal wave-packet size x0 * sqrt(2 nbar + 1).
inline double ground_state_size(const IonSpecies& species, double omega, double nbar) {
  if (nbar < 0.0) throw std::domain_error("ground_state_size: nbar must be >= 0");
  return ground_state_size(species, omega) * std::sqrt(2.0 * nbar + 1.0);
}

}  // namespace ionsim
