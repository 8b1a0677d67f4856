#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ionsim/constants.hpp"

namespace ionsim {

struct TrapPotential {
  double omega_x = 0.0;  // rad/s, weaker radial axis, gradient-aligned
  double omega_y = 0.0;  // rad/s, stronger radial axis
  double omega_z = 0.0;  // rad/s, trap axis (linear crystals form along z)
  IonSpecies species;

  void validate() const;
  // alpha = (omega_z / omega_x)^2
  double alpha() const { return (omega_z / omega_x) * (omega_z / omega_x); }
  double length_scale() const { return characteristic_length(species, omega_z); }
};

enum class CrystalConfiguration { linear, zigzag, planar };

const char* to_string(CrystalConfiguration c);

struct CrystalState {
  int n = 0;
  Eigen::MatrixX3d positions;  // meters; rows sorted by z
  double energy = 0.0;         // J
  CrystalConfiguration configuration = CrystalConfiguration::linear;
  bool converged = false;
  double residual = 0.0;       // gradient norm in units of m*omega_z^2*l
  bool near_critical = false;  // |alpha - alpha_crit| < 1e-4 (n >= 3 only)
  double length_scale = 0.0;   // meters, the l used for nondimensionalization
};

struct AnisotropyResult {
  double alpha = 0.0;
  double alpha_crit = 0.0;
  bool is_supercritical = false;
};

// Harmonic pseudopotential plus pairwise Coulomb energy, SI.
double potential_energy(const Eigen::MatrixX3d& positions, const TrapPotential& trap);

// Seeded multistart Newton minimization. Deterministic for fixed seed.
CrystalState find_equilibrium(const TrapPotential& trap, int n, std::uint64_t seed = 1);

// tol <= 0 selects the documented default of 1e-4 * state.length_scale.
CrystalConfiguration classify_configuration(const CrystalState& state, double tol = 0.0);

// Zigzag critical point of the n-ion linear chain, by bisection on alpha
// (omega_z scanned at fixed omega_x) to relative precision 1e-6.
AnisotropyResult critical_anisotropy(const TrapPotential& trap_template, int n);

namespace detail {
// Nondimensional helpers shared with the modes module. Coordinate layout:
// q = (x_0..x_{n-1}, y_0.., z_0..) in units of l; energies in m*omega_z^2*l^2;
// gamma_x = (omega_x/omega_z)^2, gamma_y likewise.
double u_value(const Eigen::VectorXd& q, int n, double gx, double gy);
Eigen::VectorXd u_gradient(const Eigen::VectorXd& q, int n, double gx, double gy);
Eigen::MatrixXd u_hessian(const Eigen::VectorXd& q, int n, double gx, double gy);
// Axial chain equilibrium z positions (ascending, units of l); independent of gx, gy.
Eigen::VectorXd chain_axial_positions(int n);
}  // namespace detail

}  // namespace ionsim
