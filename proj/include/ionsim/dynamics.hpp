#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "ionsim/coupling.hpp"
#include "ionsim/modes.hpp"

namespace ionsim {

enum class DistributionKind { fock, thermal, coherent };

// Phonon number distribution with an automatically sized truncation window.
struct PhononDistribution {
  DistributionKind kind = DistributionKind::fock;
  double parameter = 0.0;  // Fock n, or mean phonon number for thermal/coherent

  static PhononDistribution fock(int n);
  static PhononDistribution thermal(double nbar);
  static PhononDistribution coherent(double nbar);

  struct Window {
    int n_min = 0;
    int n_max = 0;
    std::vector<double> p;  // renormalized over [n_min, n_max]
  };

  // Window sized so the captured mass is at least 1 - 1e-6 of the total.
  Window populations() const;
  // Same distribution restricted to an explicit window; the captured-mass
  // requirement still applies.
  Window populations(int n_min, int n_max) const;
};

enum class Transition { carrier, rsb, bsb };

struct DriveParams {
  double rabi_frequency = 0.0;                                  // rad/s
  double detuning = 0.0;                                        // rad/s
  double pulse_time = 0.0;                                      // s
  double decay_time = std::numeric_limits<double>::infinity();  // s

  void validate() const;
};

// Red-sideband coupling Omega e^{-eta^2/2} eta |L^1_{n-1}(eta^2)|/sqrt(n); zero for n = 0.
double sideband_rabi(int n, double eta, double omega_rabi);

// Coupling magnitude for any transition type at phonon number n.
double transition_rabi(Transition transition, int n, double eta, double omega_rabi);

// Coupling magnitudes for n = 0..n_max in one recurrence pass.
std::vector<double> transition_rabi_table(Transition transition, int n_max, double eta,
                                          double omega_rabi);

// Excitation probability over t_grid, averaged over the phonon distribution,
// with the empirical contrast envelope exp(-t/decay_time) toward 1/2.
Eigen::VectorXd flop_signal(const PhononDistribution& dist, double eta, const DriveParams& drive,
                            Transition transition, const Eigen::VectorXd& t_grid);

struct FlopFitGuess {
  double nbar = 1.0;
  double rabi_frequency = 0.0;  // rad/s
  double decay_time = std::numeric_limits<double>::infinity();  // inf: hold fixed
};

struct FlopFit {
  double nbar = 0.0;
  double nbar_sigma = 0.0;
  double rabi_frequency = 0.0;
  double rabi_sigma = 0.0;
  double decay_time = std::numeric_limits<double>::infinity();
  double decay_sigma = 0.0;
  Eigen::MatrixXd covariance;  // over the fitted log-parameters
};

// Least-squares fit of the flop model to an observed trace. The Fock variant
// keeps n fixed at guess.nbar; a finite decay guess adds the envelope time as
// a fit parameter.
FlopFit fit_flop(const Eigen::VectorXd& t_grid, const Eigen::VectorXd& observed,
                 DistributionKind family, double eta, Transition transition, double detuning,
                 const FlopFitGuess& guess);

struct SpectralLine {
  double frequency = 0.0;  // rad/s, absolute
  Transition kind = Transition::carrier;
  int mode_index = -1;  // -1 for the carrier line
  bool overlapping = false;
};

struct SpectrumScanResult {
  Eigen::VectorXd frequencies;  // scan grid, rad/s absolute
  Eigen::MatrixXd excitation;   // n_grid x n_roi
  std::vector<int> roi_ions;
  std::vector<SpectralLine> lines;
  bool any_overlap = false;
};

// Frequency scan over carrier and first motional sidebands, each line treated
// as an independent two-level process; decay_time is ignored here. Lines
// closer than 3/pulse_time are flagged, not rejected.
SpectrumScanResult spectrum_scan(const ModeSpectrum& spectrum, const CouplingMatrix& couplings,
                                 double carrier_freq, const DriveParams& drive,
                                 const std::vector<PhononDistribution>& mode_distributions,
                                 const Eigen::VectorXd& freq_grid, const std::vector<int>& roi_ions,
                                 int n_threads = 1);

// Candidate spurious lines at (drive - mode)/k for k = 1, 2: subharmonics of
// the difference between the trap drive and a radial sideband.
std::vector<double> nonlinear_resonance_frequencies(double drive_freq, double radial_mode);

struct NoiseModel {
  enum class Kind { none, ornstein_uhlenbeck };
  Kind kind = Kind::none;
  double sigma = 0.0;  // rad/s, stationary rms detuning
  double tau_c = 1.0;  // s, correlation time
  std::uint64_t seed = 0;

  static NoiseModel none();
  static NoiseModel ornstein_uhlenbeck(double sigma, double tau_c, std::uint64_t seed);
  void validate() const;
};

struct CoherenceCurve {
  int echo_pulses = 0;  // 0 is a Ramsey sequence
  Eigen::VectorXd times;
  Eigen::VectorXd contrast;
  double t2 = 0.0;
  double t2_sigma = 0.0;
};

struct CoherenceResult {
  std::vector<CoherenceCurve> curves;
  // T2(l) ~ l^gamma across successive echo orders; NaN unless at least two
  // echo curves were requested.
  double exponent = 0.0;
  double exponent_sigma = 0.0;
};

// Contrast for one sequence on an explicit time grid. echo_pulses = 0 is
// Ramsey; l >= 1 places instantaneous pi pulses at odd multiples of t/(2l).
CoherenceCurve simulate_coherence(const NoiseModel& noise, int echo_pulses,
                                  const Eigen::VectorXd& times, int trajectories,
                                  int n_threads = 1);

// Full scan over echo orders. Each order gets a time grid spanning
// [0.3, 2.2] of its predicted decay time, n_times points.
CoherenceResult coherence_scan(const NoiseModel& noise, const std::vector<int>& echo_orders,
                               int trajectories, int n_times = 16, int n_threads = 1);

enum class PulseType { carrier, red, blue, wait, pi_phase };

struct PulseStep {
  PulseType type = PulseType::carrier;
  double duration = 0.0;        // s, ignored for pi_phase
  double phase = 0.0;           // rad
  double rabi_frequency = 0.0;  // rad/s, effective two-level coupling
  double detuning = 0.0;        // rad/s
};

struct SequenceSpec {
  double init_fidelity = 1.0;  // probability of starting in the dark state
  std::vector<PulseStep> pulses;
  std::vector<int> roi_ions;
  int repetitions = 1;

  void validate() const;
};

struct SequenceResult {
  int ion = 0;
  double probability = 0.0;  // exact model value before sampling
  double estimate = 0.0;     // successes / repetitions
  int successes = 0;
  double ci_low = 0.0;  // 95% Wilson interval
  double ci_high = 0.0;
};

// Idealized pulse-sequence run: imperfect state preparation, square pulses,
// projective readout sampled with counter-based streams.
std::vector<SequenceResult> simulate_sequence(const SequenceSpec& spec, std::uint64_t seed);

}  // namespace ionsim
