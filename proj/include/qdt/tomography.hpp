#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "qdt/detection.hpp"
#include "qdt/interface.hpp"
#include "qdt/optimize.hpp"
#include "qdt/qmath.hpp"
#include "qdt/source.hpp"

// 16-setting two-photon state tomography: coincidence simulation, linear
// inversion, maximum-likelihood reconstruction over a Cholesky-parametrized
// physical state, bootstrap error bars, and the arrival-time discrimination
// used for the time-bin variant.

namespace qdt {

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TomographyMode { Polarization, TimeBin };

struct TomographyPlan {
  std::array<std::pair<AnalyzerLabel, AnalyzerLabel>, 16> settings;
  double integration_time_s = 300.0;
  double coincidence_window_s = 3e-9;
  TomographyMode mode = TomographyMode::Polarization;

  /// The fixed 16 analyzer pairs, first letter XX photon, second X photon:
  /// HH HV HD HL VH VV VD VL DH DV DD DL LH LV LD LL.
  static TomographyPlan polarization();
  static TomographyPlan timebin();
};

struct TomographySettingCount {
  AnalyzerLabel a = AnalyzerLabel::H;
  AnalyzerLabel b = AnalyzerLabel::H;
  std::int64_t coincidences = 0;
};

using SettingCounts = std::array<TomographySettingCount, 16>;

/// Measurement operators for the plan: plain projectors in polarization
/// mode, effective time-bin projectors (using cfg.theta_back_rad as the
/// analysis phase) in time-bin mode.
std::array<Mat4c, 16> measurement_operators(const TomographyPlan& plan,
                                            const InterfaceConfig& cfg);

/// Expected per-setting counts for a single state, scaled so they sum to
/// `total`.
std::array<double, 16> expected_counts(const Mat4c& rho,
                                       const std::array<Mat4c, 16>& ops,
                                       double total);

/// Poisson coincidence counts for a simulated pair ensemble. Only complete
/// pairs with t_x - t_xx inside the coincidence window contribute. In
/// time-bin mode each pair state is converted through the interface and
/// weighted by the 1/4 both-photons-cross post-selection; the physical
/// theta_back in `cfg` twists the state, while reconstruction conventionally
/// assumes theta_back = 0.
SettingCounts simulate_counts(std::span<const PairEmission> pairs,
                              const TomographyPlan& plan,
                              const InterfaceConfig& cfg, double rate_scale,
                              std::uint64_t seed, bool noiseless = false);

/// Sum over accepted pairs of the joint state, and the number accepted.
/// Exposed so callers can stream pairs without retaining them.
struct PairAccumulator {
  Mat4c rho_sum = Mat4c::Zero();
  double n_pairs = 0.0;

  void add(const PairEmission& pair, double window_s);
};

SettingCounts simulate_counts(const PairAccumulator& acc,
                              const TomographyPlan& plan,
                              const InterfaceConfig& cfg, double rate_scale,
                              std::uint64_t seed, bool noiseless = false);

struct LinearInversion {
  Mat4c rho;                  // Hermitian, trace 1, possibly non-physical
  double min_eigenvalue = 0;  // negative values flag an unphysical inversion
};

/// Linear inversion through the dual basis of the 16 measurement operators.
/// Total-rate normalization comes from the four basis-complete settings
/// (HH, HV, VH, VV).
LinearInversion linear_reconstruct(const std::array<double, 16>& counts,
                                   const std::array<Mat4c, 16>& ops);

struct Reconstruction {
  TwoQubitDensity rho = TwoQubitDensity::maximally_mixed();
  double concurrence = 0.0;
  double sigma_concurrence = 0.0;
  double fidelity_best = 0.0;
  double sigma_fidelity = 0.0;
  double best_phase_rad = 0.0;
  double likelihood = 0.0;
  bool converged = false;
};

struct MleOptions {
  NelderMeadOptions nm{1e-10, 100000, 0.1, 4};
};

/// Maximum-likelihood estimate: rho = T^dag T / Tr(T^dag T) over 16 real
/// Cholesky parameters, minimizing sum (nbar_i - n_i)^2 / (2 nbar_i) with
/// the overall rate fixed by the total counts. Starts from the clamped
/// linear inversion and from I/4, keeping the better optimum.
Reconstruction mle_reconstruct(const std::array<double, 16>& counts,
                               const std::array<Mat4c, 16>& ops,
                               Basis basis = Basis::Polarization,
                               const MleOptions& opts = {});
Reconstruction mle_reconstruct(const SettingCounts& counts,
                               const std::array<Mat4c, 16>& ops,
                               Basis basis = Basis::Polarization,
                               const MleOptions& opts = {});

/// Best phase maximizing F(rho, (|00>+e^{i phi}|33>)/sqrt2): coarse grid
/// plus parabolic refinement, folded to (-pi, pi].
double best_bell_phase(const TwoQubitDensity& rho);

struct BootstrapErrors {
  double sigma_concurrence = 0.0;
  double sigma_fidelity = 0.0;
  int n_nonconverged = 0;
};

/// Poisson-resamples the counts n_resamples times (>= 100), re-runs the MLE
/// in parallel, and returns sample standard deviations of concurrence and
/// best-phase fidelity. Throws ConvergenceError when more than 10% of the
/// resamples fail to converge.
BootstrapErrors bootstrap_errors(const std::array<double, 16>& counts,
                                 const std::array<Mat4c, 16>& ops,
                                 Basis basis, int n_resamples,
                                 std::uint64_t seed,
                                 const MleOptions& opts = {});

// ---- time-bin arrival discrimination ----

struct TimebinPairRecord {
  std::int64_t pulse = 0;
  std::int64_t t_xx_ps = 0;
  std::int64_t t_x_ps = 0;
};

struct TimebinDiscrimination {
  /// Category per input tag: 0/1/2 = short-short/cross/long-long,
  /// -1 = trigger tag or rejected as ambiguous.
  std::vector<int> category;
  std::array<std::int64_t, 3> xx_category_counts{0, 0, 0};
  std::array<std::int64_t, 3> x_category_counts{0, 0, 0};
  /// Pairs with both photons in the cross category and inside the
  /// post-selection window.
  std::vector<TimebinPairRecord> pairs;
};

/// Assigns each photon tag to the nearest of the three arrival windows at
/// offsets {0, dt, 2dt} after its laser trigger, then post-selects pulses
/// where both the XX and the X photon sit in the middle window within
/// `window_s` (3 ns in the reference analysis). Photons farther than dt/2
/// from every window center are rejected when reject_ambiguous is set.
TimebinDiscrimination timebin_discriminate(std::span<const TimeTag> tags,
                                           double delta_t_s, double window_s,
                                           bool reject_ambiguous = true,
                                           double early_margin_s = 0.5e-9);

// Counts CSV, header "setting_a,setting_b,coincidences".
void write_counts_csv(std::ostream& out, const SettingCounts& counts);
SettingCounts read_counts_csv(std::istream& in);

}  // namespace qdt
