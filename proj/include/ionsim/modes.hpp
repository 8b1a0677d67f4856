#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ionsim/crystal.hpp"

namespace ionsim {

struct ModeSpectrum {
  int n_ions = 0;
  int n_modes = 0;                // 3n
  Eigen::VectorXd frequencies;    // rad/s, ascending
  Eigen::MatrixXd eigenvectors;   // n_modes x n_modes, row per mode
  // Row layout matches the solver: (x_0..x_{n-1}, y_0.., z_0..).
  double component(int mode, int ion, int axis) const {
    return eigenvectors(mode, axis * n_ions + ion);
  }
};

enum class ModeAxis { x, y, z, mixed };

const char* to_string(ModeAxis a);

struct ModeLabel {
  int mode = 0;            // index into the spectrum (ascending frequency)
  ModeAxis axis = ModeAxis::mixed;
  bool is_com = false;
  int rank = 0;            // 0 for com; otherwise 1,2,... from highest to lowest frequency
  std::string name;        // "x-com", "x1", "mixed", ...
  std::vector<bool> visible;  // per ion: |eigenvector projection on gradient_dir| > 1e-6
};

struct SoftModeEntry {
  double alpha = 0.0;
  double omega_soft = 0.0;  // rad/s
  bool valid = false;
  std::string note;
};

// Second-derivative matrix of potential_energy at the state, SI (J/m^2).
Eigen::MatrixXd hessian(const CrystalState& state, const TrapPotential& trap);

// Mass-weighted normal modes. Eigenvector sign convention: the entry of
// largest magnitude (first such index on ties) is positive.
ModeSpectrum normal_modes(const CrystalState& state, const TrapPotential& trap);

std::vector<ModeLabel> classify_modes(const ModeSpectrum& spectrum,
                                      const std::vector<int>& roi_ions,
                                      const Eigen::Vector3d& gradient_dir);

// Lowest x-type mode frequency per alpha, scanning omega_z at fixed omega_x.
// Entries where no stable configuration or no x mode exists are flagged.
std::vector<SoftModeEntry> soft_mode_curve(const TrapPotential& trap_template, int n,
                                           const std::vector<double>& alpha_grid,
                                           std::uint64_t seed = 1);

}  // namespace ionsim
