#pragma once

#include <random>

#include "qdt/qmath.hpp"

// Channel model of the unbalanced Mach-Zehnder polarization/time-bin
// interface. The forward pass maps H -> early (short path) and
// V -> late e^{i theta_fwd} (long path) per photon and ends on a 45 deg
// polarizer; the backward pass reuses the interferometer for time-bin
// analysis, sorting photons into three arrival categories.

namespace qdt {

struct InterfaceConfig {
  double delta_t_s = 4.3e-9;      // long-short path delay
  double theta_fwd_rad = 0.3;     // per-photon long-path phase, forward pass
  double theta_back_rad = -0.367;  // per-photon long-path phase, backward pass
  double polarizer_angle_deg = 45.0;
  double transmission_short = 1.0;
  double transmission_long = 1.0;

  void validate() const;
};

struct TimeBinPhoton {
  double nominal_time_s = 0.0;  // early-component arrival (short path)
  Vec2c bin_amplitudes;         // (early, late), |.|^2 sums to 1
};

enum class PathCategory { ShortShort, Cross, LongLong };

struct ConvertResult {
  TwoQubitDensity rho_tb;
  double transmission;  // pair transmission through polarizer and paths
};

/// Forward conversion of a polarization pair state to the time-bin basis.
/// With the default 45 deg polarizer and unit path transmissions this is the
/// unitary relabel diag(1, e^{i th}, e^{i th}, e^{2i th}) plus a scalar
/// transmission of 1/4; concurrence is preserved exactly.
ConvertResult convert(const TwoQubitDensity& rho_pol,
                      const InterfaceConfig& cfg);

struct CategoryOutcome {
  PathCategory category;
  double arrival_time_s;  // nominal + {0, dt, 2dt}
};

/// Samples the backward-pass path for one photon. For a balanced time-bin
/// superposition the category probabilities are (1/4, 1/2, 1/4); only the
/// cross category carries the time-bin qubit into polarization.
CategoryOutcome backward_pass_category(const TimeBinPhoton& photon,
                                       const InterfaceConfig& cfg,
                                       std::mt19937_64& rng);

/// Per-photon analysis relabel of the cross category:
/// |e> -> e^{i theta_back} |V>, |l> -> |H>.
Mat2c timebin_analysis_map(double theta_back_rad);

/// projector(a, b) conjugated into the time-bin basis through
/// timebin_analysis_map on each photon; rank-1 and idempotent.
TwoQubitDensity effective_timebin_projector(const Analyzer& a,
                                            const Analyzer& b,
                                            const InterfaceConfig& cfg);

}  // namespace qdt
