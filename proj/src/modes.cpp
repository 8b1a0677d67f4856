#include "ionsim/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ionsim/errors.hpp"

namespace ionsim {

const char* to_string(ModeAxis a) {
  switch (a) {
    case ModeAxis::x: return "x";
    case ModeAxis::y: return "y";
    case ModeAxis::z: return "z";
    case ModeAxis::mixed: return "mixed";
  }
  return "?";
}

namespace {

Eigen::VectorXd flatten(const CrystalState& state) {
  const int n = state.n;
  Eigen::VectorXd q(3 * n);
  for (int i = 0; i < n; ++i) {
    q[i] = state.positions(i, 0) / state.length_scale;
    q[n + i] = state.positions(i, 1) / state.length_scale;
    q[2 * n + i] = state.positions(i, 2) / state.length_scale;
  }
  return q;
}

ModeAxis dominant_axis(const Eigen::VectorXd& row, int n, double* fractions = nullptr) {
  double f[3] = {0.0, 0.0, 0.0};
  for (int a = 0; a < 3; ++a) f[a] = row.segment(a * n, n).squaredNorm();
  if (fractions) std::copy(f, f + 3, fractions);
  int arg = 0;
  for (int a = 1; a < 3; ++a)
    if (f[a] > f[arg]) arg = a;
  if (f[arg] <= 0.5) return ModeAxis::mixed;
  return static_cast<ModeAxis>(arg);
}

}  // namespace

Eigen::MatrixXd hessian(const CrystalState& state, const TrapPotential& trap) {
  trap.validate();
  if (!state.converged) throw std::domain_error("hessian: state not converged");
  const double gx = (trap.omega_x / trap.omega_z) * (trap.omega_x / trap.omega_z);
  const double gy = (trap.omega_y / trap.omega_z) * (trap.omega_y / trap.omega_z);
  Eigen::MatrixXd h = detail::u_hessian(flatten(state), state.n, gx, gy);
  return h * (trap.species.mass * trap.omega_z * trap.omega_z);
}

ModeSpectrum normal_modes(const CrystalState& state, const TrapPotential& trap) {
  trap.validate();
  if (!state.converged) throw std::domain_error("normal_modes: state not converged");
  const int n = state.n;
  const double gx = (trap.omega_x / trap.omega_z) * (trap.omega_x / trap.omega_z);
  const double gy = (trap.omega_y / trap.omega_z) * (trap.omega_y / trap.omega_z);
  const double eps_stab = 1e-6 * gx;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::u_hessian(flatten(state), n, gx, gy));
  Eigen::VectorXd lam = es.eigenvalues();
  Eigen::MatrixXd vec = es.eigenvectors().transpose();  // row per mode

  for (int k = 0; k < lam.size(); ++k) {
    if (lam[k] < -eps_stab) {
      Eigen::VectorXd row = vec.row(k);
      int imax = 0;
      for (int i = 1; i < row.size(); ++i)
        if (std::abs(row[i]) > std::abs(row[imax])) imax = i;
      throw InstabilityError("normal_modes: unstable direction along ion " +
                                 std::to_string(imax % n) + " axis " +
                                 std::string(1, "xyz"[imax / n]),
                             k, lam[k]);
    }
    if (lam[k] < 0.0) lam[k] = 0.0;
  }

  // Stable ordering inside degenerate clusters: by dominant axis, x before y before z.
  std::vector<int> order(lam.size());
  std::iota(order.begin(), order.end(), 0);
  double lmax = std::max(lam.maxCoeff(), 1e-300);
  for (std::size_t i = 0; i + 1 < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && std::abs(lam[order[j]] - lam[order[i]]) <= 1e-9 * lmax) ++j;
    if (j - i > 1) {
      std::stable_sort(order.begin() + i, order.begin() + j, [&](int a, int b) {
        return static_cast<int>(dominant_axis(vec.row(a), n)) <
               static_cast<int>(dominant_axis(vec.row(b), n));
      });
    }
    i = j;
  }

  ModeSpectrum sp;
  sp.n_ions = n;
  sp.n_modes = 3 * n;
  sp.frequencies.resize(3 * n);
  sp.eigenvectors.resize(3 * n, 3 * n);
  for (int k = 0; k < 3 * n; ++k) {
    sp.frequencies[k] = trap.omega_z * std::sqrt(lam[order[k]]);
    Eigen::VectorXd row = vec.row(order[k]);
    int imax = 0;
    for (int i = 1; i < row.size(); ++i)
      if (std::abs(row[i]) > std::abs(row[imax])) imax = i;
    if (row[imax] < 0.0) row = -row;
    sp.eigenvectors.row(k) = row;
  }
  return sp;
}

std::vector<ModeLabel> classify_modes(const ModeSpectrum& spectrum,
                                      const std::vector<int>& roi_ions,
                                      const Eigen::Vector3d& gradient_dir) {
  if (roi_ions.empty()) throw std::domain_error("classify_modes: empty ROI");
  for (int ion : roi_ions)
    if (ion < 0 || ion >= spectrum.n_ions)
      throw std::domain_error("classify_modes: ROI ion index out of range");
  if (std::abs(gradient_dir.norm() - 1.0) > 1e-9)
    throw std::domain_error("classify_modes: gradient_dir must be a unit vector");

  const int n = spectrum.n_ions;
  std::vector<ModeLabel> labels(spectrum.n_modes);
  for (int k = 0; k < spectrum.n_modes; ++k) {
    ModeLabel& lb = labels[k];
    lb.mode = k;
    Eigen::VectorXd row = spectrum.eigenvectors.row(k);
    double f[3];
    lb.axis = dominant_axis(row, n, f);
    if (lb.axis != ModeAxis::mixed) {
      int a = static_cast<int>(lb.axis);
      double uniform = row.segment(a * n, n).sum() / std::sqrt(static_cast<double>(n));
      lb.is_com = std::abs(uniform) > 0.99;
    }
    lb.visible.resize(n);
    for (int ion = 0; ion < n; ++ion) {
      double proj = 0.0;
      for (int a = 0; a < 3; ++a) proj += spectrum.component(k, ion, a) * gradient_dir[a];
      lb.visible[ion] = std::abs(proj) > 1e-6;
    }
  }
  // Rank per axis, highest to lowest frequency among non-com modes.
  for (ModeAxis ax : {ModeAxis::x, ModeAxis::y, ModeAxis::z}) {
    std::vector<int> members;
    for (int k = 0; k < spectrum.n_modes; ++k)
      if (labels[k].axis == ax && !labels[k].is_com) members.push_back(k);
    std::sort(members.begin(), members.end(),
              [&](int a, int b) { return spectrum.frequencies[a] > spectrum.frequencies[b]; });
    for (std::size_t r = 0; r < members.size(); ++r) labels[members[r]].rank = static_cast<int>(r) + 1;
  }
  for (ModeLabel& lb : labels) {
    if (lb.axis == ModeAxis::mixed)
      lb.name = "mixed";
    else if (lb.is_com)
      lb.name = std::string(to_string(lb.axis)) + "-com";
    else
      lb.name = std::string(to_string(lb.axis)) + std::to_string(lb.rank);
  }
  return labels;
}

std::vector<SoftModeEntry> soft_mode_curve(const TrapPotential& trap_template, int n,
                                           const std::vector<double>& alpha_grid,
                                           std::uint64_t seed) {
  trap_template.validate();
  for (double a : alpha_grid)
    if (!(a > 0.0 && a < 1.0))
      throw std::domain_error("soft_mode_curve: alpha grid must lie within (0, 1)");

  std::vector<SoftModeEntry> out;
  out.reserve(alpha_grid.size());
  for (double alpha : alpha_grid) {
    SoftModeEntry e;
    e.alpha = alpha;
    TrapPotential trap = trap_template;
    trap.omega_z = trap_template.omega_x * std::sqrt(alpha);
    try {
      CrystalState st = find_equilibrium(trap, n, seed);
      ModeSpectrum sp = normal_modes(st, trap);
      // Lowest mode whose norm is predominantly x.
      int found = -1;
      for (int k = 0; k < sp.n_modes; ++k) {
        double fx = sp.eigenvectors.row(k).segment(0, n).squaredNorm();
        if (fx > 0.5) {
          found = k;
          break;
        }
      }
      if (found < 0) {
        e.note = "no x-dominant mode";
      } else {
        e.omega_soft = sp.frequencies[found];
        e.valid = true;
      }
    } catch (const SimError& err) {
      e.note = err.what();
    } catch (const std::domain_error& err) {
      e.note = err.what();
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace ionsim
