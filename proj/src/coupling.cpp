#include "ionsim/coupling.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"

namespace ionsim {

CouplingMatrix effective_lamb_dicke(const ModeSpectrum& spectrum, const FieldModel& field,
                                    const CrystalState& state, const IonSpecies& species,
                                    const Eigen::Vector3d& direction) {
  species.validate();
  if (direction.norm() < 1e-12) throw std::invalid_argument("gradient direction must be nonzero");
  const Eigen::Vector3d dhat = direction.normalized();

  const int n = spectrum.n_ions;
  const int n_modes = static_cast<int>(spectrum.frequencies.size());
  if (state.n != n) throw std::invalid_argument("crystal and mode spectrum disagree on ion count");

  const double omega_max = spectrum.frequencies.maxCoeff();
  for (int k = 0; k < n_modes; ++k) {
    if (spectrum.frequencies[k] < 1e-6 * omega_max)
      throw DivergenceError("mode " + std::to_string(k) +
                                " is soft; gradient coupling diverges as omega -> 0",
                            k);
  }

  CouplingMatrix out;
  out.direction = dhat;
  out.eta.resize(n_modes, n);
  out.ion_gradients.resize(n);

  for (int l = 0; l < n; ++l)
    out.ion_gradients[l] = magnitude_gradient(field, state.positions.row(l).transpose(), dhat);

  Eigen::Vector3d mid = Eigen::Vector3d::Zero();
  for (int l = 0; l < n; ++l) mid += state.positions.row(l).transpose();
  mid /= n;
  out.gradient_used = magnitude_gradient(field, mid, dhat);

  const double pref = species.delta_ms * species.lande_g * PhysicalConstants::bohr_magneton /
                      2.0;
  for (int k = 0; k < n_modes; ++k) {
    const double omega = spectrum.frequencies[k];
    const double denom = std::sqrt(PhysicalConstants::hbar * species.mass * omega * omega * omega);
    for (int l = 0; l < n; ++l) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a) s += spectrum.component(k, l, a) * dhat[a];
      out.eta(k, l) = s * pref / denom * out.ion_gradients[l];
    }
  }
  return out;
}

double laser_lamb_dicke(double k_eff, double projection, const IonSpecies& species, double omega) {
  species.validate();
  if (omega <= 0.0) throw std::invalid_argument("mode frequency must be positive");
  return std::abs(k_eff * projection) *
         std::sqrt(PhysicalConstants::hbar / (2.0 * species.mass * omega));
}

}  // namespace ionsim
