#pragma once

#include <string>
#include <vector>

#include "qdt/config.hpp"
#include "qdt/correlate.hpp"
#include "qdt/tomography.hpp"

// End-to-end orchestration: source -> (interface) -> detection -> analysis,
// shared by the CLI commands and the acceptance suite.

namespace qdt {

enum class SimStage {
  Source,   // tags straight from the emitter (correlation measurements)
  TimeBin,  // tags after the double interferometer pass (arrival categories)
};

/// Full tag stream for a run, trigger channel included, sorted.
std::vector<TimeTag> simulate_tags(const RunConfig& cfg, SimStage stage);

struct TomoPipelineResult {
  SettingCounts counts;
  Reconstruction rec;
  TomographyMode mode = TomographyMode::Polarization;
  double pairs_in_window = 0.0;
};

/// source -> (interface) -> coincidence counts -> MLE -> bootstrap.
/// The same config and seed give the same underlying pair ensemble in both
/// modes, so polarization and time-bin reconstructions are comparable run
/// for run.
TomoPipelineResult run_tomography_pipeline(const RunConfig& cfg,
                                           TomographyMode mode,
                                           bool with_bootstrap = true);

struct ReproduceRow {
  std::string name;
  double simulated = 0.0;
  double paper_value = 0.0;
  double paper_error = 0.0;
  double tolerance = 0.0;
  bool within_band = false;
  std::string reference;
};

/// All paper-anchored quantities in one table. Reference values and bands
/// come from the shipped data file.
std::vector<ReproduceRow> run_reproduce(const RunConfig& cfg,
                                        const std::string& paper_values_path);

// Helpers reused by reproduce and the acceptance suite.
G2Result g2_from_tags(const std::vector<TimeTag>& tags, int start_channel,
                      int stop_channel, const RunConfig& cfg,
                      std::int64_t bin_width_ps = 128,
                      std::int64_t range_ps = 100000, int n_side_peaks = 6);
/// Decay-time fit of the trigger->channel histogram tail, seconds.
double fit_lifetime(const std::vector<TimeTag>& tags, int channel,
                    const RunConfig& cfg, std::int64_t fit_lo_ps,
                    std::int64_t fit_hi_ps);
/// log-log slope of emitted-photon counts vs mean_pairs over a low-power
/// sweep; channel 0 = XX, 1 = X.
double power_law_exponent(const RunConfig& cfg, int channel,
                          const std::vector<double>& mu_values,
                          std::int64_t pulses_per_point);
/// Mean spacing of the three arrival-time peaks (seconds) from time-bin
/// stage tags, via per-peak centroids against the trigger.
double three_peak_spacing(const std::vector<TimeTag>& tags,
                          const RunConfig& cfg);

int run_cli(int argc, const char* const* argv);

}  // namespace qdt
