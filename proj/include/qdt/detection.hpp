#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Detector chain: efficiency thinning, Gaussian timing jitter, dark counts,
// dead time, and the 1 ps integer time-tag records that downstream
// correlation analysis consumes.

namespace qdt {

namespace channel {
constexpr int kXX = 0;
constexpr int kX = 1;
constexpr int kTrigger = 2;
}  // namespace channel

struct DetectorConfig {
  std::array<double, 2> efficiency{1.0, 1.0};  // per channel (XX, X)
  double jitter_fwhm_s = 0.34e-9;              // lumped system response
  double dark_rate_hz = 0.0;                   // per channel
  double dead_time_s = 0.0;

  void validate() const;
};

struct TimeTag {
  int channel = 0;
  std::int64_t time_ps = 0;

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

/// Photon arriving at the detector; `weight` multiplies the detection
/// probability (e.g. interface transmission already sampled upstream is 1).
struct PhotonEvent {
  int channel = 0;
  double time_s = 0.0;
  double weight = 1.0;
};

/// Thins by efficiency x weight, applies Gaussian jitter
/// (sigma = FWHM / 2.355), adds homogeneous dark counts over [0, span_s],
/// drops tags within dead_time of the previous kept same-channel tag, and
/// returns tags sorted by (time_ps, channel).
std::vector<TimeTag> detect(const std::vector<PhotonEvent>& photons,
                            const DetectorConfig& cfg, double span_s,
                            std::uint64_t seed);

/// One trigger tag per pulse at k / rep_rate, channel 2.
std::vector<TimeTag> emit_trigger_tags(double rep_rate_hz,
                                       std::int64_t n_pulses);

void sort_tags(std::vector<TimeTag>& tags);

// Bit-exact tag file format: UTF-8 CSV, header "channel,time_ps", rows
// sorted by time_ps ascending, ties broken by channel ascending.
void write_tags_csv(std::ostream& out, const std::vector<TimeTag>& tags);
std::vector<TimeTag> read_tags_csv(std::istream& in);

}  // namespace qdt
