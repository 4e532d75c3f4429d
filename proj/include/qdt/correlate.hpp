#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "qdt/detection.hpp"

// Start-stop coincidence histogramming and g2(0) extraction. All pairs
// within the delay window are counted (time-tagger post-processing style),
// which keeps a brute-force oracle exact.

namespace qdt {

struct CorrelateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Binned delays stop - start. Bins are centered on integer multiples of
/// bin_width_ps, indices -m..m with half-away-from-zero edge rounding, so
/// autocorrelations are symmetric bin-for-bin.
struct CoincidenceHistogram {
  std::int64_t bin_width_ps = 128;
  std::int64_t range_ps = 100000;
  int start_channel = 0;
  int stop_channel = 0;
  double rep_period_s = 0.0;
  std::vector<std::int64_t> counts;

  std::int64_t half_bins() const { return range_ps / bin_width_ps; }
  std::int64_t nbins() const { return 2 * half_bins() + 1; }
  /// Delay at the center of bin i (i in [0, nbins)).
  std::int64_t delay_of_bin(std::int64_t i) const {
    return (i - half_bins()) * bin_width_ps;
  }
  std::int64_t total() const;
};

/// Signed bin index for a delay, or nbins (out of range). Exposed so tests
/// can share the exact edge convention.
std::int64_t bin_index(std::int64_t delay_ps, std::int64_t bin_width_ps,
                       std::int64_t half_bins);

CoincidenceHistogram build_histogram(std::span<const TimeTag> tags,
                                     int start_channel, int stop_channel,
                                     std::int64_t bin_width_ps,
                                     std::int64_t range_ps,
                                     double rep_period_s);

struct G2Result {
  double g2_zero_peak_max = 0.0;
  double g2_zero_integrated = 0.0;
  double side_peak_mean_area = 0.0;
};

/// Normalizes the central peak against the mean of n_side_peaks pulse-period
/// peaks on each side. Peak windows are full repetition periods centered on
/// k * rep_period. Throws CorrelateError when the side peaks are empty or
/// the range does not cover them.
G2Result g2_zero(const CoincidenceHistogram& hist, int n_side_peaks);

/// Weighted log-linear fit of the histogram tail over [t_lo, t_hi] ps on
/// the positive-delay side; returns the decay constant in seconds.
double fit_exponential_tail(const CoincidenceHistogram& hist,
                            std::int64_t t_lo_ps, std::int64_t t_hi_ps);

// CSV export, header "delay_ps,counts".
void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& hist);
void write_g2_metrics(std::ostream& out, const G2Result& g2);

}  // namespace qdt
