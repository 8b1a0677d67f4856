#include "ionsim/crystal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "ionsim/errors.hpp"
#include "ionsim/rng.hpp"

namespace ionsim {

void TrapPotential::validate() const {
  species.validate();
  if (!(omega_x > 0.0) || !(omega_y > 0.0) || !(omega_z > 0.0))
    throw std::domain_error("trap: all secular frequencies must be > 0");
}

const char* to_string(CrystalConfiguration c) {
  switch (c) {
    case CrystalConfiguration::linear: return "linear";
    case CrystalConfiguration::zigzag: return "zigzag";
    case CrystalConfiguration::planar: return "planar";
  }
  return "?";
}

namespace detail {

namespace {
constexpr double kMinSeparation = 1e-12;  // units of l; below this the model is singular
}

double u_value(const Eigen::VectorXd& q, int n, double gx, double gy) {
  double u = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = q[i], y = q[n + i], z = q[2 * n + i];
    u += 0.5 * (gx * x * x + gy * y * y + z * z);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double dx = q[i] - q[j], dy = q[n + i] - q[n + j], dz = q[2 * n + i] - q[2 * n + j];
      double r = std::sqrt(dx * dx + dy * dy + dz * dz);
      if (r < kMinSeparation) return std::numeric_limits<double>::infinity();
      u += 1.0 / r;
    }
  }
  return u;
}

Eigen::VectorXd u_gradient(const Eigen::VectorXd& q, int n, double gx, double gy) {
  Eigen::VectorXd g(3 * n);
  for (int i = 0; i < n; ++i) {
    g[i] = gx * q[i];
    g[n + i] = gy * q[n + i];
    g[2 * n + i] = q[2 * n + i];
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double dx = q[i] - q[j], dy = q[n + i] - q[n + j], dz = q[2 * n + i] - q[2 * n + j];
      double r2 = dx * dx + dy * dy + dz * dz;
      double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
      g[i] -= dx * inv_r3;
      g[j] += dx * inv_r3;
      g[n + i] -= dy * inv_r3;
      g[n + j] += dy * inv_r3;
      g[2 * n + i] -= dz * inv_r3;
      g[2 * n + j] += dz * inv_r3;
    }
  }
  return g;
}

Eigen::MatrixXd u_hessian(const Eigen::VectorXd& q, int n, double gx, double gy) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = gx;
    h(n + i, n + i) = gy;
    h(2 * n + i, 2 * n + i) = 1.0;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double d[3] = {q[i] - q[j], q[n + i] - q[n + j], q[2 * n + i] - q[2 * n + j]};
      double r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
      double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
      // Coulomb pair block: (3 u u^T - I)/r^3 with u the pair unit vector.
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          double blk = (3.0 * d[a] * d[b] / r2 - (a == b ? 1.0 : 0.0)) * inv_r3;
          h(a * n + i, b * n + i) += blk;
          h(a * n + j, b * n + j) += blk;
          h(a * n + i, b * n + j) -= blk;
          h(a * n + j, b * n + i) -= blk;
        }
      }
    }
  }
  return h;
}

Eigen::VectorXd chain_axial_positions(int n) {
  // 1-D problem: U(z) = sum z_i^2/2 + sum 1/|z_i - z_j|, convex enough for
  // plain Newton from an equally spaced start.
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = (i - 0.5 * (n - 1)) * 1.3;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd g = z;
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double d = z[i] - z[j];
        double s = d > 0 ? 1.0 : -1.0;
        double inv2 = 1.0 / (d * d);
        double inv3 = 2.0 * inv2 / std::abs(d);
        g[i] -= s * inv2;
        g[j] += s * inv2;
        h(i, i) += inv3;
        h(j, j) += inv3;
        h(i, j) -= inv3;
        h(j, i) -= inv3;
      }
    }
    if (g.norm() < 1e-14) break;
    z -= h.ldlt().solve(g);
  }
  std::sort(z.data(), z.data() + n);
  return z;
}

}  // namespace detail

double potential_energy(const Eigen::MatrixX3d& positions, const TrapPotential& trap) {
  trap.validate();
  const double m = trap.species.mass;
  double u = 0.0;
  for (int i = 0; i < positions.rows(); ++i) {
    u += 0.5 * m *
         (trap.omega_x * trap.omega_x * positions(i, 0) * positions(i, 0) +
          trap.omega_y * trap.omega_y * positions(i, 1) * positions(i, 1) +
          trap.omega_z * trap.omega_z * positions(i, 2) * positions(i, 2));
  }
  for (int i = 0; i < positions.rows(); ++i) {
    for (int j = i + 1; j < positions.rows(); ++j) {
      double r = (positions.row(i) - positions.row(j)).norm();
      if (r < 1e-15)
        throw SingularityError("potential_energy: coincident ions " + std::to_string(i) + "," +
                               std::to_string(j));
      u += PhysicalConstants::coulomb_constant / r;
    }
  }
  return u;
}

namespace {

struct MinimizeResult {
  Eigen::VectorXd q;
  double gnorm = std::numeric_limits<double>::infinity();
  double value = std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Modified Newton (eigenvalue-shifted) with Armijo backtracking and
// saddle-escape kicks along the unstable direction.
MinimizeResult minimize(Eigen::VectorXd q, int n, double gx, double gy, std::mt19937_64& rng) {
  const double eps_stab = 1e-6 * gx;  // nondim mirror of eps_stability = 1e-6 omega_x^2
  const double gtol = 1e-12;
  MinimizeResult best;
  int escapes = 0;
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd g = detail::u_gradient(q, n, gx, gy);
    double gn = g.norm();
    if (gn < best.gnorm) {
      best.q = q;
      best.gnorm = gn;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::u_hessian(q, n, gx, gy));
    double lmin = es.eigenvalues()[0];
    if (gn < gtol) {
      if (lmin >= -eps_stab) {
        best.q = q;
        best.gnorm = gn;
        best.value = detail::u_value(q, n, gx, gy);
        best.ok = true;
        return best;
      }
      if (++escapes > 8) return best;
      double kick = 0.2 * escapes * (u01(rng) < 0.5 ? 1.0 : -1.0);
      q += kick * es.eigenvectors().col(0);
      continue;
    }
    double mu = std::max(0.0, 1e-9 - lmin);
    Eigen::VectorXd w = es.eigenvectors().transpose() * g;
    for (int k = 0; k < w.size(); ++k) w[k] /= (es.eigenvalues()[k] + mu);
    Eigen::VectorXd p = -(es.eigenvectors() * w);
    double u0 = detail::u_value(q, n, gx, gy);
    double slope = g.dot(p);
    if (slope >= 0.0) {  // shifted Hessian lost descent; fall back to steepest descent
      p = -g;
      slope = -gn * gn;
    }
    double t = 1.0;
    while (t > 1e-14 && !(detail::u_value(q + t * p, n, gx, gy) <= u0 + 1e-4 * t * slope))
      t *= 0.5;
    if (t <= 1e-14) return best;
    q += t * p;
  }
  return best;
}

// Alternate-sign transverse pattern test in one plane.
bool alternates(const Eigen::VectorXd& t, double tol) {
  for (int i = 0; i < t.size(); ++i)
    if (std::abs(t[i]) < tol) return false;
  for (int i = 0; i + 1 < t.size(); ++i)
    if (t[i] * t[i + 1] > 0.0) return false;
  return true;
}

}  // namespace

CrystalConfiguration classify_configuration(const CrystalState& state, double tol) {
  if (!state.converged) throw std::domain_error("classify_configuration: state not converged");
  if (tol <= 0.0) tol = 1e-4 * state.length_scale;
  const auto& p = state.positions;
  double mx = p.col(0).cwiseAbs().maxCoeff();
  double my = p.col(1).cwiseAbs().maxCoeff();
  if (mx < tol && my < tol) return CrystalConfiguration::linear;
  if (mx >= my && my < tol && alternates(p.col(0), tol)) return CrystalConfiguration::zigzag;
  if (my > mx && mx < tol && alternates(p.col(1), tol)) return CrystalConfiguration::zigzag;
  return CrystalConfiguration::planar;
}

AnisotropyResult critical_anisotropy(const TrapPotential& trap_template, int n) {
  trap_template.validate();
  if (n < 3) throw std::domain_error("critical_anisotropy: need n >= 3 for a zigzag transition");
  if (!(trap_template.omega_x < trap_template.omega_y))
    throw std::domain_error("critical_anisotropy: requires omega_x < omega_y");

  // Chain geometry in z-units is independent of the transverse confinement, so
  // each bisection step only rebuilds the transverse block with gamma_x = 1/alpha.
  Eigen::VectorXd z = detail::chain_axial_positions(n);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(3 * n);
  q.tail(n) = z;

  auto soft_lambda = [&](double alpha) {
    double gx = 1.0 / alpha;
    Eigen::MatrixXd h = detail::u_hessian(q, n, gx, 4.0 * gx);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.topLeftCorner(n, n));
    return es.eigenvalues()[0];  // units of omega_z^2
  };

  double lo = 1e-6, hi = 1.0;
  while (soft_lambda(hi) > 0.0 && hi < 64.0) hi *= 2.0;
  if (soft_lambda(hi) > 0.0)
    throw ConvergenceError("critical_anisotropy: no sign change found");
  for (int it = 0; it < 200 && (hi - lo) > 1e-7 * lo; ++it) {
    double mid = 0.5 * (lo + hi);
    (soft_lambda(mid) > 0.0 ? lo : hi) = mid;
  }
  AnisotropyResult out;
  out.alpha = trap_template.alpha();
  out.alpha_crit = 0.5 * (lo + hi);
  out.is_supercritical = out.alpha > out.alpha_crit;
  return out;
}

CrystalState find_equilibrium(const TrapPotential& trap, int n, std::uint64_t seed) {
  trap.validate();
  if (n < 1) throw std::domain_error("find_equilibrium: n must be >= 1");
  const double l = trap.length_scale();
  const double gx = (trap.omega_x / trap.omega_z) * (trap.omega_x / trap.omega_z);
  const double gy = (trap.omega_y / trap.omega_z) * (trap.omega_y / trap.omega_z);

  auto rng = stream_rng(seed, 0x63727973u, static_cast<std::uint64_t>(n));
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::VectorXd zchain = detail::chain_axial_positions(n);
  std::vector<Eigen::VectorXd> starts;
  {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(3 * n);
    q.tail(n) = zchain;
    for (int i = 0; i < 2 * n; ++i) q[i] += 1e-3 * gauss(rng);
    starts.push_back(q);
  }
  if (n >= 2) {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(3 * n);
    q.tail(n) = zchain;
    for (int i = 0; i < n; ++i) q[i] = 0.3 * (i % 2 ? -1.0 : 1.0) + 1e-3 * gauss(rng);
    for (int i = 0; i < n; ++i) q[n + i] = 1e-3 * gauss(rng);
    starts.push_back(q);
  }
  if (n >= 3) {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(3 * n);
    q.tail(n) = 0.75 * zchain;
    for (int i = 0; i < n; ++i) q[i] = 0.7 * (i % 2 ? -1.0 : 1.0) + 1e-3 * gauss(rng);
    for (int i = 0; i < n; ++i) q[n + i] = 1e-3 * gauss(rng);
    starts.push_back(q);
    double scale = 0.8 * std::cbrt(static_cast<double>(n));
    for (int rep = 0; rep < 3; ++rep) {
      Eigen::VectorXd r(3 * n);
      for (int i = 0; i < 3 * n; ++i) r[i] = scale * gauss(rng);
      starts.push_back(r);
    }
  }

  MinimizeResult best;
  bool have = false;
  for (auto& s : starts) {
    MinimizeResult r = minimize(s, n, gx, gy, rng);
    if (!r.ok) {
      if (!have && r.gnorm < best.gnorm) best = r;
      continue;
    }
    if (!have || r.value < best.value - 1e-13 * std::abs(best.value)) {
      best = r;
      have = true;
    }
  }
  if (!have) {
    std::vector<double> it(best.q.data(), best.q.data() + best.q.size());
    for (auto& v : it) v *= l;
    throw ConvergenceError("find_equilibrium: no start converged to a stable minimum", it);
  }

  // Canonical form: rows sorted by (z, x, y); mirror degeneracy resolved so the
  // first off-axis ion along the chain has positive transverse coordinate.
  Eigen::VectorXd q = best.q;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (q[2 * n + a] != q[2 * n + b]) return q[2 * n + a] < q[2 * n + b];
    if (q[a] != q[b]) return q[a] < q[b];
    return q[n + a] < q[n + b];
  });
  Eigen::MatrixX3d pos(n, 3);
  for (int i = 0; i < n; ++i)
    pos.row(i) << q[order[i]], q[n + order[i]], q[2 * n + order[i]];
  const double mirror_tol = 1e-8;
  for (int axis = 0; axis < 2; ++axis) {
    for (int i = 0; i < n; ++i) {
      if (std::abs(pos(i, axis)) > mirror_tol) {
        if (pos(i, axis) < 0.0) pos.col(axis) = -pos.col(axis);
        break;
      }
    }
  }
  // Re-sort in case a mirror flip reordered equal-z rows.
  std::vector<int> order2(n);
  std::iota(order2.begin(), order2.end(), 0);
  std::sort(order2.begin(), order2.end(), [&](int a, int b) {
    if (pos(a, 2) != pos(b, 2)) return pos(a, 2) < pos(b, 2);
    if (pos(a, 0) != pos(b, 0)) return pos(a, 0) < pos(b, 0);
    return pos(a, 1) < pos(b, 1);
  });
  Eigen::MatrixX3d sorted(n, 3);
  for (int i = 0; i < n; ++i) sorted.row(i) = pos.row(order2[i]);

  CrystalState state;
  state.n = n;
  state.positions = sorted * l;
  state.length_scale = l;
  state.energy = detail::u_value(q, n, gx, gy) * trap.species.mass * trap.omega_z *
                 trap.omega_z * l * l;
  state.residual = best.gnorm;
  state.converged = best.gnorm <= 1e-10;
  if (n >= 3 && trap.omega_x < trap.omega_y) {
    AnisotropyResult a = critical_anisotropy(trap, n);
    state.near_critical = std::abs(a.alpha - a.alpha_crit) < 1e-4;
  }
  state.configuration = classify_configuration(state);
  return state;
}

}  // namespace ionsim
