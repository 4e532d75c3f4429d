#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "qdt/detection.hpp"
#include "qdt/interface.hpp"
#include "qdt/source.hpp"

// Flat key-value run configuration ("section.key=value" lines, '#' comments).

namespace qdt {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TomoConfig {
  double integration_time_pol_s = 300.0;
  double integration_time_timebin_s = 1800.0;
  double coincidence_window_s = 3e-9;
  /// Expected total coincidences across the 16 polarization settings; the
  /// time-bin run scales from it through the integration-time ratio and the
  /// interface losses.
  double target_total_counts = 200000.0;
  int n_bootstrap = 100;
  bool noiseless = false;
};

struct RunConfig {
  SourceConfig source;
  InterfaceConfig iface;
  DetectorConfig detector;
  TomoConfig tomo;
  std::int64_t n_pulses = 2000000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Parses config text; throws ConfigError naming the offending key.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);
/// Applies one "key=value" assignment.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);
/// Canonical serialization; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& cfg);

}  // namespace qdt
