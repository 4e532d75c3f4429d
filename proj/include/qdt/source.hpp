#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "qdt/qmath.hpp"

// Monte Carlo model of the pulsed XX-X cascade emitter: Poisson excitation,
// exponential decay chains, re-excitation inside the pulse window, the
// fine-structure phase precession of the pair state, and a Poissonian
// pair source used as a statistical reference.

namespace qdt {

enum class SourceMode { Dot, PoissonianReference };

struct SourceConfig {
  double rep_rate_hz = 80e6;
  double pulse_fwhm_s = 100e-12;
  double mean_pairs = 0.5;        // mean e-h pairs created per pulse
  double tau_xx_s = 0.72e-9;      // XX radiative lifetime
  double tau_x_s = 1.25e-9;       // X radiative lifetime
  double fss_period_s = 7.3e-9;   // h/S spin precession period; inf disables
  double phase_phi0_rad = 0.0;    // intrinsic phase offset of the pair state
  double depolarization = 0.204;  // white-noise admixture, calibrated
  /// Scales the re-excitation probability when the refill lands on a dot
  /// still holding an exciton (capture onto an occupied dot is suppressed).
  double capture_suppression = 0.15;
  SourceMode mode = SourceMode::Dot;
  double poisson_pair_prob = 0.1;  // reference mode: P(pulse makes >=1 pair)

  double rep_period_s() const { return 1.0 / rep_rate_hz; }
  /// Rectangular excitation window, duration 2 x pulse FWHM.
  double window_s() const { return 2.0 * pulse_fwhm_s; }
  void validate() const;  // throws std::invalid_argument
};

/// One XX->X cascade. `complete` is false when re-excitation interrupted
/// the cascade before the X photon was emitted; then t_x_s is meaningless.
struct PairEmission {
  std::int64_t pulse_index = 0;
  double t_xx_s = 0.0;
  double t_x_s = 0.0;
  TwoQubitDensity joint_state = TwoQubitDensity::maximally_mixed();
  bool complete = false;
};

struct EmissionRecord {
  std::int64_t pulse_index = 0;
  std::vector<double> xx_times_s;
  std::vector<double> x_times_s;
  std::vector<PairEmission> pairs;

  void clear() {
    xx_times_s.clear();
    x_times_s.clear();
    pairs.clear();
  }
};

/// Joint polarization state of a cascade whose X photon lagged the XX photon
/// by x_delay: (1-eps) |bell(phi0 + 2 pi x_delay / T_fss)> + eps I/4.
TwoQubitDensity cascade_state(const SourceConfig& cfg, double x_delay_s);

/// Samples one excitation pulse into `out` (reused across calls).
void sample_pulse(const SourceConfig& cfg, std::int64_t pulse_index,
                  std::mt19937_64& rng, EmissionRecord& out);

/// Streams n_pulses records through `sink`, deterministic in `seed`.
/// Pulse k fires at k / rep_rate. Generation is chunked so pulse-index
/// ranges can be regenerated independently.
void run_source(const SourceConfig& cfg, std::int64_t n_pulses,
                std::uint64_t seed,
                const std::function<void(const EmissionRecord&)>& sink);

/// Convenience for tests and small runs.
std::vector<EmissionRecord> collect_source(const SourceConfig& cfg,
                                           std::int64_t n_pulses,
                                           std::uint64_t seed);

}  // namespace qdt
