#include "ionsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "ionsim/errors.hpp"
#include "ionsim/fit.hpp"
#include "ionsim/parallel.hpp"
#include "ionsim/rng.hpp"

namespace ionsim {

namespace {

constexpr double kMassTol = 1e-6;        // captured probability must reach 1 - this
constexpr int kMaxWindow = 20'000'000;   // entries; memory budget for a window
constexpr int kMaxPhonon = 1'000'000;    // recurrence validity guard

[[noreturn]] void window_mass_error(const char* what) {
  throw TruncationError(std::string(what) +
                        ": truncation window cannot capture the required probability mass");
}

}  // namespace

PhononDistribution PhononDistribution::fock(int n) {
  if (n < 0) throw std::invalid_argument("Fock number must be nonnegative");
  PhononDistribution d;
  d.kind = DistributionKind::fock;
  d.parameter = n;
  return d;
}

PhononDistribution PhononDistribution::thermal(double nbar) {
  if (!(nbar >= 0.0)) throw std::invalid_argument("mean phonon number must be nonnegative");
  PhononDistribution d;
  d.kind = DistributionKind::thermal;
  d.parameter = nbar;
  return d;
}

PhononDistribution PhononDistribution::coherent(double nbar) {
  if (!(nbar >= 0.0)) throw std::invalid_argument("mean phonon number must be nonnegative");
  PhononDistribution d;
  d.kind = DistributionKind::coherent;
  d.parameter = nbar;
  return d;
}

PhononDistribution::Window PhononDistribution::populations() const {
  switch (kind) {
    case DistributionKind::fock: {
      const int n = static_cast<int>(std::lround(parameter));
      return populations(n, n);
    }
    case DistributionKind::thermal: {
      const double nbar = parameter;
      const int n_max =
          static_cast<int>(std::ceil(nbar + 30.0 * std::sqrt(nbar * (nbar + 1.0)) + 30.0));
      return populations(0, n_max);
    }
    case DistributionKind::coherent: {
      const double nbar = parameter;
      const double half = 12.0 * std::sqrt(nbar) + 12.0;
      const int n_min = std::max(0, static_cast<int>(std::floor(nbar - half)));
      const int n_max = static_cast<int>(std::ceil(nbar + half));
      return populations(n_min, n_max);
    }
  }
  throw std::logic_error("unreachable distribution kind");
}

PhononDistribution::Window PhononDistribution::populations(int n_min, int n_max) const {
  if (n_min < 0 || n_max < n_min) throw std::invalid_argument("invalid truncation window");
  if (n_max - n_min + 1 > kMaxWindow) window_mass_error("phonon distribution");

  Window w;
  w.n_min = n_min;
  w.n_max = n_max;
  w.p.resize(n_max - n_min + 1, 0.0);

  switch (kind) {
    case DistributionKind::fock: {
      const int n = static_cast<int>(std::lround(parameter));
      if (n < n_min || n > n_max) window_mass_error("fock distribution");
      w.p[n - n_min] = 1.0;
      return w;
    }
    case DistributionKind::thermal: {
      const double nbar = parameter;
      if (nbar == 0.0) {
        if (n_min > 0) window_mass_error("thermal distribution");
        w.p[0] = 1.0;
        return w;
      }
      const double log_q = std::log(nbar / (nbar + 1.0));
      const double log_norm = -std::log(nbar + 1.0);
      for (int n = n_min; n <= n_max; ++n) w.p[n - n_min] = std::exp(log_norm + n * log_q);
      break;
    }
    case DistributionKind::coherent: {
      const double nbar = parameter;
      if (nbar == 0.0) {
        if (n_min > 0) window_mass_error("coherent distribution");
        w.p[0] = 1.0;
        return w;
      }
      const double log_nbar = std::log(nbar);
      for (int n = n_min; n <= n_max; ++n)
        w.p[n - n_min] = std::exp(-nbar + n * log_nbar - std::lgamma(n + 1.0));
      break;
    }
  }

  double mass = 0.0;
  for (double v : w.p) mass += v;
  if (mass < 1.0 - kMassTol) window_mass_error("phonon distribution");
  for (double& v : w.p) v /= mass;
  return w;
}

void DriveParams::validate() const {
  if (!(rabi_frequency >= 0.0)) throw std::invalid_argument("Rabi frequency must be nonnegative");
  if (!(pulse_time >= 0.0)) throw std::invalid_argument("pulse time must be nonnegative");
  if (!(decay_time > 0.0)) throw std::invalid_argument("decay time must be positive");
  if (!std::isfinite(detuning)) throw std::invalid_argument("detuning must be finite");
}

namespace {

// L^alpha_k(x) for k = 0..k_max by the three-term recurrence.
std::vector<double> laguerre_table(int alpha, int k_max, double x) {
  std::vector<double> out(k_max + 1);
  out[0] = 1.0;
  if (k_max >= 1) out[1] = 1.0 + alpha - x;
  for (int k = 2; k <= k_max; ++k)
    out[k] = ((2.0 * k - 1.0 + alpha - x) * out[k - 1] - (k - 1.0 + alpha) * out[k - 2]) / k;
  return out;
}

}  // namespace

std::vector<double> transition_rabi_table(Transition transition, int n_max, double eta,
                                          double omega_rabi) {
  if (n_max < 0) throw std::invalid_argument("phonon number must be nonnegative");
  if (n_max > kMaxPhonon)
    throw std::invalid_argument("phonon number exceeds the recurrence validity guard");
  const double x = eta * eta;
  const double dw = std::exp(-0.5 * x);
  std::vector<double> out(n_max + 1);
  // Couplings are reported as magnitudes; the Laguerre factor changes sign
  // past its zeros but only drive-relative phase would carry that.
  switch (transition) {
    case Transition::carrier: {
      const auto lag = laguerre_table(0, n_max, x);
      for (int n = 0; n <= n_max; ++n) out[n] = std::abs(omega_rabi * dw * lag[n]);
      break;
    }
    case Transition::rsb: {
      const auto lag = laguerre_table(1, std::max(0, n_max - 1), x);
      out[0] = 0.0;
      for (int n = 1; n <= n_max; ++n)
        out[n] = std::abs(omega_rabi * dw * eta * lag[n - 1] / std::sqrt(static_cast<double>(n)));
      break;
    }
    case Transition::bsb: {
      const auto lag = laguerre_table(1, n_max, x);
      for (int n = 0; n <= n_max; ++n)
        out[n] = std::abs(omega_rabi * dw * eta * lag[n] / std::sqrt(n + 1.0));
      break;
    }
  }
  return out;
}

double transition_rabi(Transition transition, int n, double eta, double omega_rabi) {
  if (n < 0) throw std::invalid_argument("phonon number must be nonnegative");
  return transition_rabi_table(transition, n, eta, omega_rabi)[n];
}

double sideband_rabi(int n, double eta, double omega_rabi) {
  return transition_rabi(Transition::rsb, n, eta, omega_rabi);
}

Eigen::VectorXd flop_signal(const PhononDistribution& dist, double eta, const DriveParams& drive,
                            Transition transition, const Eigen::VectorXd& t_grid) {
  drive.validate();
  for (int i = 0; i < t_grid.size(); ++i)
    if (!(t_grid[i] >= 0.0)) throw std::invalid_argument("time grid must be nonnegative");

  const auto window = dist.populations();
  const auto coupling =
      transition_rabi_table(transition, window.n_max, eta, drive.rabi_frequency);
  const double delta = drive.detuning;

  // Collapse to (weight, generalized frequency) pairs once; the time loop then
  // touches only contributing terms.
  std::vector<double> amp, freq;
  amp.reserve(window.p.size());
  freq.reserve(window.p.size());
  for (int n = window.n_min; n <= window.n_max; ++n) {
    const double om = coupling[n];
    const double w2 = om * om + delta * delta;
    if (om == 0.0 || w2 == 0.0) continue;
    amp.push_back(window.p[n - window.n_min] * om * om / w2);
    freq.push_back(std::sqrt(w2));
  }

  Eigen::VectorXd out(t_grid.size());
  for (int i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    double p = 0.0;
    for (std::size_t k = 0; k < amp.size(); ++k) {
      const double s = std::sin(0.5 * freq[k] * t);
      p += amp[k] * s * s;
    }
    const double env = (t == 0.0) ? 1.0 : std::exp(-t / drive.decay_time);
    out[i] = 0.5 + (p - 0.5) * env;
  }
  return out;
}

FlopFit fit_flop(const Eigen::VectorXd& t_grid, const Eigen::VectorXd& observed,
                 DistributionKind family, double eta, Transition transition, double detuning,
                 const FlopFitGuess& guess) {
  if (t_grid.size() != observed.size()) throw std::invalid_argument("grid/signal size mismatch");
  if (t_grid.size() < 10) throw std::invalid_argument("need at least 10 samples to fit");
  if (!(guess.rabi_frequency > 0.0))
    throw std::invalid_argument("initial Rabi frequency must be positive");

  const bool fit_nbar = family != DistributionKind::fock;
  const bool fit_decay = std::isfinite(guess.decay_time);
  if (fit_nbar && !(guess.nbar > 0.0))
    throw std::invalid_argument("initial mean phonon number must be positive");

  const int fock_n = fit_nbar ? 0 : static_cast<int>(std::lround(guess.nbar));

  // Positive quantities are fitted in log space.
  int dim = 1 + (fit_nbar ? 1 : 0) + (fit_decay ? 1 : 0);
  Eigen::VectorXd p0(dim);
  int idx = 0;
  const int i_omega = idx++;
  p0[i_omega] = std::log(guess.rabi_frequency);
  int i_nbar = -1, i_decay = -1;
  if (fit_nbar) {
    i_nbar = idx++;
    p0[i_nbar] = std::log(guess.nbar);
  }
  if (fit_decay) {
    i_decay = idx++;
    p0[i_decay] = std::log(guess.decay_time);
  }

  auto model = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    PhononDistribution dist;
    switch (family) {
      case DistributionKind::fock:
        dist = PhononDistribution::fock(fock_n);
        break;
      case DistributionKind::thermal:
        dist = PhononDistribution::thermal(std::exp(p[i_nbar]));
        break;
      case DistributionKind::coherent:
        dist = PhononDistribution::coherent(std::exp(p[i_nbar]));
        break;
    }
    DriveParams drive;
    drive.rabi_frequency = std::exp(p[i_omega]);
    drive.detuning = detuning;
    drive.decay_time =
        fit_decay ? std::exp(p[i_decay]) : std::numeric_limits<double>::infinity();
    return flop_signal(dist, eta, drive, transition, t_grid);
  };

  auto residuals = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    return model(p) - observed;
  };

  const FitResult res = fit_least_squares(residuals, p0);

  FlopFit out;
  out.covariance = res.covariance;
  out.rabi_frequency = std::exp(res.params[i_omega]);
  out.rabi_sigma = out.rabi_frequency * res.sigma[i_omega];
  if (fit_nbar) {
    out.nbar = std::exp(res.params[i_nbar]);
    out.nbar_sigma = out.nbar * res.sigma[i_nbar];
  } else {
    out.nbar = fock_n;
    out.nbar_sigma = 0.0;
  }
  if (fit_decay) {
    out.decay_time = std::exp(res.params[i_decay]);
    out.decay_sigma = out.decay_time * res.sigma[i_decay];
  }
  return out;
}

namespace {

struct LineTerms {
  double center = 0.0;  // rad/s absolute
  // Precomputed (p_n, Omega_n) pairs for the generalized Rabi sum.
  std::vector<double> weight;
  std::vector<double> coupling;
};

double line_probability(const LineTerms& line, double delta, double tau) {
  double p = 0.0;
  for (std::size_t k = 0; k < line.weight.size(); ++k) {
    const double om = line.coupling[k];
    const double w2 = om * om + delta * delta;
    if (w2 == 0.0) continue;
    const double s = std::sin(0.5 * std::sqrt(w2) * tau);
    p += line.weight[k] * (om * om / w2) * s * s;
  }
  return p;
}

}  // namespace

SpectrumScanResult spectrum_scan(const ModeSpectrum& spectrum, const CouplingMatrix& couplings,
                                 double carrier_freq, const DriveParams& drive,
                                 const std::vector<PhononDistribution>& mode_distributions,
                                 const Eigen::VectorXd& freq_grid, const std::vector<int>& roi_ions,
                                 int n_threads) {
  drive.validate();
  if (!(carrier_freq > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
  if (!(drive.pulse_time > 0.0)) throw std::invalid_argument("pulse time must be positive");
  const int n_modes = static_cast<int>(spectrum.frequencies.size());
  if (couplings.eta.rows() != n_modes || couplings.eta.cols() != spectrum.n_ions)
    throw std::invalid_argument("coupling matrix does not match the mode spectrum");
  if (static_cast<int>(mode_distributions.size()) != n_modes)
    throw std::invalid_argument("need one phonon distribution per mode");
  if (roi_ions.empty()) throw std::invalid_argument("ROI ion set must not be empty");
  for (int ion : roi_ions)
    if (ion < 0 || ion >= spectrum.n_ions) throw std::invalid_argument("ROI ion out of range");

  SpectrumScanResult out;
  out.frequencies = freq_grid;
  out.roi_ions = roi_ions;

  out.lines.push_back({carrier_freq, Transition::carrier, -1, false});
  for (int m = 0; m < n_modes; ++m) {
    out.lines.push_back({carrier_freq - spectrum.frequencies[m], Transition::rsb, m, false});
    out.lines.push_back({carrier_freq + spectrum.frequencies[m], Transition::bsb, m, false});
  }
  const double min_gap = 3.0 / drive.pulse_time;
  for (std::size_t i = 0; i < out.lines.size(); ++i)
    for (std::size_t j = i + 1; j < out.lines.size(); ++j)
      if (std::abs(out.lines[i].frequency - out.lines[j].frequency) < min_gap) {
        out.lines[i].overlapping = true;
        out.lines[j].overlapping = true;
        out.any_overlap = true;
      }

  // Per ROI ion: carrier line plus one line per (mode, sideband).
  const int n_roi = static_cast<int>(roi_ions.size());
  std::vector<std::vector<LineTerms>> terms(n_roi);
  std::vector<PhononDistribution::Window> windows;
  windows.reserve(n_modes);
  for (int m = 0; m < n_modes; ++m) windows.push_back(mode_distributions[m].populations());

  for (int r = 0; r < n_roi; ++r) {
    LineTerms carrier;
    carrier.center = carrier_freq;
    carrier.weight = {1.0};
    carrier.coupling = {drive.rabi_frequency};
    terms[r].push_back(std::move(carrier));
    for (int m = 0; m < n_modes; ++m) {
      const double eta = std::abs(couplings.eta(m, roi_ions[r]));
      const auto& win = windows[m];
      for (Transition tr : {Transition::rsb, Transition::bsb}) {
        LineTerms lt;
        lt.center = carrier_freq +
                    (tr == Transition::bsb ? spectrum.frequencies[m] : -spectrum.frequencies[m]);
        const auto table = transition_rabi_table(tr, win.n_max, eta, drive.rabi_frequency);
        for (int n = win.n_min; n <= win.n_max; ++n) {
          if (table[n] == 0.0) continue;
          lt.weight.push_back(win.p[n - win.n_min]);
          lt.coupling.push_back(table[n]);
        }
        terms[r].push_back(std::move(lt));
      }
    }
  }

  out.excitation.resize(freq_grid.size(), n_roi);
  parallel_for(static_cast<int>(freq_grid.size()), n_threads, [&](int i) {
    const double f = freq_grid[i];
    for (int r = 0; r < n_roi; ++r) {
      double survive = 1.0;
      for (const auto& line : terms[r])
        survive *= 1.0 - line_probability(line, f - line.center, drive.pulse_time);
      out.excitation(i, r) = 1.0 - survive;
    }
  });
  return out;
}

std::vector<double> nonlinear_resonance_frequencies(double drive_freq, double radial_mode) {
  if (!(drive_freq > 0.0) || !(radial_mode > 0.0))
    throw std::invalid_argument("frequencies must be positive");
  const double base = drive_freq - radial_mode;
  return {base, 0.5 * base};
}

NoiseModel NoiseModel::none() { return NoiseModel{}; }

NoiseModel NoiseModel::ornstein_uhlenbeck(double sigma, double tau_c, std::uint64_t seed) {
  NoiseModel m;
  m.kind = Kind::ornstein_uhlenbeck;
  m.sigma = sigma;
  m.tau_c = tau_c;
  m.seed = seed;
  m.validate();
  return m;
}

void NoiseModel::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise amplitude must be nonnegative");
  if (!(tau_c > 0.0)) throw std::invalid_argument("correlation time must be positive");
}

namespace {

// Advance a stationary OU process by h and return the exact sampled pair
// (next value, integral over the step), conditioned on the current value.
// Means and covariances follow from the exponential autocorrelation.
struct OuStep {
  double next;
  double integral;
};

OuStep ou_advance(double value, double h, double sigma, double tau, std::mt19937_64& rng) {
  const double x = h / tau;
  const double em = -std::expm1(-x);  // 1 - e^{-x}, cancellation-safe
  const double e = 1.0 - em;
  const double var_next = sigma * sigma * em * (2.0 - em);
  const double cov = sigma * sigma * tau * em * em;
  // The integral variance factor 2x - em (2 + em) cancels to O(x^3); its
  // direct form is rounding noise for small x, so switch to the series there.
  const double f = x < 5e-3
                       ? x * x * x * (2.0 / 3.0 + x * (-0.5 + x * (7.0 / 30.0 - x / 12.0)))
                       : 2.0 * x - em * (2.0 + em);
  const double var_int = std::max(0.0, sigma * sigma * tau * tau * f);

  const double u = normal01(rng);
  const double v = normal01(rng);
  OuStep out;
  const double sd_next = std::sqrt(var_next);
  out.next = e * value + sd_next * u;
  double mean_int = value * tau * em;
  if (sd_next > 0.0) {
    const double slope = cov / sd_next;
    out.integral =
        mean_int + slope * u + std::sqrt(std::max(0.0, var_int - slope * slope)) * v;
  } else {
    out.integral = mean_int + std::sqrt(var_int) * v;
  }
  return out;
}

// Accumulated phase for one trajectory of a Ramsey (l = 0) or l-pulse echo
// sequence of total time t; pi pulses sit at odd multiples of t/(2l).
double sequence_phase(double t, int l, double sigma, double tau, std::mt19937_64& rng) {
  double value = sigma * normal01(rng);  // stationary start
  double phase = 0.0;
  if (l == 0) {
    return ou_advance(value, t, sigma, tau, rng).integral;
  }
  double sign = 1.0;
  for (int seg = 0; seg <= l; ++seg) {
    const double h = (seg == 0 || seg == l) ? t / (2.0 * l) : t / l;
    const OuStep step = ou_advance(value, h, sigma, tau, rng);
    phase += sign * step.integral;
    value = step.next;
    sign = -sign;
  }
  return phase;
}

double fit_gaussian_t2(const Eigen::VectorXd& times, const Eigen::VectorXd& contrast,
                       double& sigma_out) {
  // Initial scale: first crossing of e^{-1}, else the grid midpoint.
  double t2_guess = times[times.size() / 2];
  for (int i = 0; i < times.size(); ++i)
    if (contrast[i] < std::exp(-1.0)) {
      t2_guess = std::max(times[i], 1e-12);
      break;
    }
  auto residuals = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    const double t2 = std::exp(p[0]);
    Eigen::VectorXd r(times.size());
    for (int i = 0; i < times.size(); ++i) {
      const double z = times[i] / t2;
      r[i] = std::exp(-z * z) - contrast[i];
    }
    return r;
  };
  Eigen::VectorXd p0(1);
  p0[0] = std::log(t2_guess);
  const FitResult res = fit_least_squares(residuals, p0);
  const double t2 = std::exp(res.params[0]);
  sigma_out = t2 * res.sigma[0];
  return t2;
}

}  // namespace

CoherenceCurve simulate_coherence(const NoiseModel& noise, int echo_pulses,
                                  const Eigen::VectorXd& times, int trajectories, int n_threads) {
  noise.validate();
  if (echo_pulses < 0) throw std::invalid_argument("echo pulse count must be nonnegative");
  if (trajectories < 100) throw std::invalid_argument("need at least 100 trajectories");
  for (int i = 0; i < times.size(); ++i)
    if (!(times[i] > 0.0)) throw std::invalid_argument("sequence times must be positive");

  CoherenceCurve out;
  out.echo_pulses = echo_pulses;
  out.times = times;
  out.contrast.resize(times.size());

  if (noise.kind == NoiseModel::Kind::none || noise.sigma == 0.0) {
    out.contrast.setOnes();
    out.t2 = std::numeric_limits<double>::infinity();
    out.t2_sigma = 0.0;
    return out;
  }

  const int n_t = static_cast<int>(times.size());
  // One stream per (sequence, time point, trajectory): results are
  // independent of scheduling.
  std::vector<std::complex<double>> phases(static_cast<std::size_t>(n_t) * trajectories);
  parallel_for(n_t * trajectories, n_threads, [&](int idx) {
    const int it = idx / trajectories;
    const int j = idx % trajectories;
    auto rng = stream_rng(noise.seed, static_cast<std::uint64_t>(echo_pulses),
                          static_cast<std::uint64_t>(it), static_cast<std::uint64_t>(j));
    const double phi = sequence_phase(times[it], echo_pulses, noise.sigma, noise.tau_c, rng);
    phases[idx] = std::complex<double>(std::cos(phi), std::sin(phi));
  });
  for (int it = 0; it < n_t; ++it) {
    std::complex<double> acc(0.0, 0.0);
    for (int j = 0; j < trajectories; ++j)
      acc += phases[static_cast<std::size_t>(it) * trajectories + j];
    out.contrast[it] = std::abs(acc) / trajectories;
  }

  try {
    out.t2 = fit_gaussian_t2(out.times, out.contrast, out.t2_sigma);
  } catch (const FitError& err) {
    std::vector<std::vector<double>> curves = {
        std::vector<double>(out.times.data(), out.times.data() + out.times.size()),
        std::vector<double>(out.contrast.data(), out.contrast.data() + out.contrast.size())};
    throw FitError(std::string("coherence decay fit failed: ") + err.what(), err.best_params,
                   std::move(curves));
  }
  return out;
}

CoherenceResult coherence_scan(const NoiseModel& noise, const std::vector<int>& echo_orders,
                               int trajectories, int n_times, int n_threads) {
  noise.validate();
  if (echo_orders.empty()) throw std::invalid_argument("need at least one sequence");
  if (n_times < 4) throw std::invalid_argument("need at least 4 time points");
  if (noise.kind != NoiseModel::Kind::ornstein_uhlenbeck || noise.sigma == 0.0)
    throw std::invalid_argument("coherence scan needs a nonzero noise model");

  CoherenceResult out;
  for (int l : echo_orders) {
    // Grid spans the expected decay: quasi-static Gaussian for Ramsey,
    // the l^{2/3} motional-narrowing estimate for echoes.
    const double t2_pred =
        (l == 0) ? std::sqrt(2.0) / noise.sigma
                 : std::cbrt(12.0 * l * l * noise.tau_c / (noise.sigma * noise.sigma));
    Eigen::VectorXd grid(n_times);
    for (int i = 0; i < n_times; ++i)
      grid[i] = (0.3 + (2.2 - 0.3) * i / (n_times - 1.0)) * t2_pred;
    out.curves.push_back(simulate_coherence(noise, l, grid, trajectories, n_threads));
  }

  std::vector<double> log_l, log_t2;
  for (const auto& c : out.curves)
    if (c.echo_pulses >= 1) {
      log_l.push_back(std::log(static_cast<double>(c.echo_pulses)));
      log_t2.push_back(std::log(c.t2));
    }
  if (log_l.size() < 2) {
    out.exponent = std::numeric_limits<double>::quiet_NaN();
    out.exponent_sigma = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  const int m = static_cast<int>(log_l.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < m; ++i) {
    sx += log_l[i];
    sy += log_t2[i];
    sxx += log_l[i] * log_l[i];
    sxy += log_l[i] * log_t2[i];
  }
  const double denom = m * sxx - sx * sx;
  out.exponent = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - out.exponent * sx) / m;
  double ssr = 0.0;
  for (int i = 0; i < m; ++i) {
    const double r = log_t2[i] - (intercept + out.exponent * log_l[i]);
    ssr += r * r;
  }
  out.exponent_sigma = (m > 2) ? std::sqrt(ssr / (m - 2) * m / denom) : 0.0;
  return out;
}

void SequenceSpec::validate() const {
  if (!(init_fidelity >= 0.0 && init_fidelity <= 1.0))
    throw std::invalid_argument("init fidelity must lie in [0, 1]");
  if (repetitions < 1) throw std::invalid_argument("need at least one repetition");
  if (roi_ions.empty()) throw std::invalid_argument("ROI ion set must not be empty");
  for (const auto& p : pulses) {
    if (!(p.duration >= 0.0)) throw std::invalid_argument("pulse durations must be nonnegative");
    if (!(p.rabi_frequency >= 0.0))
      throw std::invalid_argument("pulse Rabi frequencies must be nonnegative");
  }
}

namespace {

using Mat2 = Eigen::Matrix2cd;

// Square-pulse propagator on (dark, bright) for coupling omega, detuning
// delta, drive phase phi.
Mat2 pulse_unitary(double omega, double delta, double phi, double t) {
  const double w = std::hypot(omega, delta);
  Mat2 u = Mat2::Identity();
  if (w == 0.0 || t == 0.0) return u;
  const double c = std::cos(0.5 * w * t);
  const double s = std::sin(0.5 * w * t);
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> off = (omega / w) * std::exp(-i * phi);
  u(0, 0) = c - i * s * (delta / w);
  u(1, 1) = c + i * s * (delta / w);
  u(0, 1) = -i * s * off;
  u(1, 0) = -i * s * std::conj(off);
  return u;
}

double wilson_half_width(double p_hat, int n, double z, double& center) {
  const double z2 = z * z;
  center = (p_hat + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half =
      z * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return half;
}

}  // namespace

std::vector<SequenceResult> simulate_sequence(const SequenceSpec& spec, std::uint64_t seed) {
  spec.validate();

  Mat2 u = Mat2::Identity();
  double phase_offset = 0.0;
  for (const auto& step : spec.pulses) {
    switch (step.type) {
      case PulseType::pi_phase:
        phase_offset += 3.14159265358979323846;
        break;
      case PulseType::wait:
        u = pulse_unitary(0.0, step.detuning, 0.0, step.duration) * u;
        break;
      case PulseType::carrier:
      case PulseType::red:
      case PulseType::blue:
        u = pulse_unitary(step.rabi_frequency, step.detuning, step.phase + phase_offset,
                          step.duration) *
            u;
        break;
    }
  }

  const double p_from_dark = std::norm(u(1, 0));
  const double p_from_bright = std::norm(u(1, 1));
  const double p_up = spec.init_fidelity * p_from_dark + (1.0 - spec.init_fidelity) * p_from_bright;

  std::vector<SequenceResult> out;
  out.reserve(spec.roi_ions.size());
  const double z95 = 1.959963984540054;
  for (int ion : spec.roi_ions) {
    SequenceResult r;
    r.ion = ion;
    r.probability = p_up;
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(ion) + 1);
    int k = 0;
    for (int rep = 0; rep < spec.repetitions; ++rep)
      if (uniform01(rng) < p_up) ++k;
    r.successes = k;
    r.estimate = static_cast<double>(k) / spec.repetitions;
    double center = 0.0;
    const double half = wilson_half_width(r.estimate, spec.repetitions, z95, center);
    r.ci_low = std::max(0.0, center - half);
    r.ci_high = std::min(1.0, center + half);
    out.push_back(r);
  }
  return out;
}

}  // namespace ionsim
