#pragma once

#include <Eigen/Dense>

#include "ionsim/field.hpp"
#include "ionsim/modes.hpp"

namespace ionsim {

struct CouplingMatrix {
  Eigen::MatrixXd eta;            // n_modes x n_ions, signed, dimensionless
  Eigen::VectorXd ion_gradients;  // T/m, d|B|/d(direction) at each ion
  double gradient_used = 0.0;     // T/m, the value at the crystal midpoint
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
};

// Gradient-induced spin-motion coupling per (mode, ion):
//   eta_nl = S_nl * dm_S g mu_B / (2 sqrt(hbar m omega_n^3)) * d|B|/dx at ion l,
// with S_nl the eigenvector component of ion l along the gradient direction.
// The leading 1/2 follows from the sigma_z/2 form of the gradient Hamiltonian.
CouplingMatrix effective_lamb_dicke(const ModeSpectrum& spectrum, const FieldModel& field,
                                    const CrystalState& state, const IonSpecies& species,
                                    const Eigen::Vector3d& direction = Eigen::Vector3d::UnitX());

// Optical Lamb-Dicke factor eta = |k_eff * projection| * sqrt(hbar/(2 m omega)).
double laser_lamb_dicke(double k_eff, double projection, const IonSpecies& species, double omega);

}  // namespace ionsim
