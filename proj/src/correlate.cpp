#include "qdt/correlate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace qdt {

std::int64_t CoincidenceHistogram::total() const {
  std::int64_t sum = 0;
  for (std::int64_t c : counts) sum += c;
  return sum;
}

std::int64_t bin_index(std::int64_t delay_ps, std::int64_t bin_width_ps,
                       std::int64_t half_bins) {
  // Round half away from zero so bin(d) == -bin(-d) exactly.
  const std::int64_t mag = std::abs(delay_ps);
  const std::int64_t idx = (2 * mag + bin_width_ps) / (2 * bin_width_ps);
  const std::int64_t signed_idx = delay_ps >= 0 ? idx : -idx;
  if (signed_idx < -half_bins || signed_idx > half_bins)
    return 2 * half_bins + 1;  // out of range sentinel
  return signed_idx + half_bins;
}

CoincidenceHistogram build_histogram(std::span<const TimeTag> tags,
                                     int start_channel, int stop_channel,
                                     std::int64_t bin_width_ps,
                                     std::int64_t range_ps,
                                     double rep_period_s) {
  if (bin_width_ps <= 0) throw CorrelateError("bin_width must be > 0");
  if (range_ps < bin_width_ps)
    throw CorrelateError("range must be >= bin_width");

  std::vector<std::int64_t> starts, stops;
  for (const TimeTag& t : tags) {
    if (t.channel == start_channel) starts.push_back(t.time_ps);
    if (t.channel == stop_channel) stops.push_back(t.time_ps);
  }
  if (!std::is_sorted(starts.begin(), starts.end()) ||
      !std::is_sorted(stops.begin(), stops.end()))
    throw CorrelateError("tags must be time-sorted");

  CoincidenceHistogram hist;
  hist.bin_width_ps = bin_width_ps;
  hist.range_ps = range_ps;
  hist.start_channel = start_channel;
  hist.stop_channel = stop_channel;
  hist.rep_period_s = rep_period_s;
  hist.counts.assign(static_cast<std::size_t>(hist.nbins()), 0);

  const bool same = (start_channel == stop_channel);
  const std::int64_t m = hist.half_bins();
  std::size_t lo = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const std::int64_t s = starts[i];
    while (lo < stops.size() && stops[lo] < s - range_ps) ++lo;
    for (std::size_t j = lo; j < stops.size() && stops[j] <= s + range_ps; ++j) {
      if (same && j == i) continue;  // a tag never pairs with itself
      const std::int64_t idx = bin_index(stops[j] - s, bin_width_ps, m);
      if (idx < hist.nbins()) ++hist.counts[static_cast<std::size_t>(idx)];
    }
  }
  return hist;
}

G2Result g2_zero(const CoincidenceHistogram& hist, int n_side_peaks) {
  if (n_side_peaks < 1) throw CorrelateError("g2_zero: need >= 1 side peak");
  if (!(hist.rep_period_s > 0.0))
    throw CorrelateError("g2_zero: rep_period not set");
  const double period_ps = hist.rep_period_s * 1e12;
  if (static_cast<double>(hist.range_ps) <
      (n_side_peaks + 0.5) * period_ps - 0.5 * static_cast<double>(hist.bin_width_ps))
    throw CorrelateError("g2_zero: range does not cover the side peaks");

  // Assign each bin to the nearest multiple of the pulse period.
  std::vector<double> area(static_cast<std::size_t>(2 * n_side_peaks + 1), 0.0);
  std::vector<double> peak(static_cast<std::size_t>(2 * n_side_peaks + 1), 0.0);
  for (std::int64_t i = 0; i < hist.nbins(); ++i) {
    const double delay = static_cast<double>(hist.delay_of_bin(i));
    const long k = std::lround(delay / period_ps);
    if (std::abs(k) > n_side_peaks) continue;
    const std::size_t slot = static_cast<std::size_t>(k + n_side_peaks);
    const double c = static_cast<double>(hist.counts[static_cast<std::size_t>(i)]);
    area[slot] += c;
    peak[slot] = std::max(peak[slot], c);
  }

  double side_area = 0.0, side_peak = 0.0;
  for (int k = -n_side_peaks; k <= n_side_peaks; ++k) {
    if (k == 0) continue;
    side_area += area[static_cast<std::size_t>(k + n_side_peaks)];
    side_peak += peak[static_cast<std::size_t>(k + n_side_peaks)];
  }
  side_area /= 2.0 * n_side_peaks;
  side_peak /= 2.0 * n_side_peaks;
  if (!(side_area > 0.0))
    throw CorrelateError("g2_zero: side peaks are empty, ratio undefined");

  G2Result out;
  out.side_peak_mean_area = side_area;
  out.g2_zero_integrated = area[static_cast<std::size_t>(n_side_peaks)] / side_area;
  out.g2_zero_peak_max =
      side_peak > 0.0 ? peak[static_cast<std::size_t>(n_side_peaks)] / side_peak
                      : 0.0;
  return out;
}

double fit_exponential_tail(const CoincidenceHistogram& hist,
                            std::int64_t t_lo_ps, std::int64_t t_hi_ps) {
  // Poisson-weighted least squares on ln(counts).
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  int used = 0;
  for (std::int64_t i = 0; i < hist.nbins(); ++i) {
    const std::int64_t d = hist.delay_of_bin(i);
    if (d < t_lo_ps || d > t_hi_ps) continue;
    const std::int64_t c = hist.counts[static_cast<std::size_t>(i)];
    if (c <= 0) continue;
    const double w = static_cast<double>(c);
    const double x = static_cast<double>(d);
    const double y = std::log(w);
    sw += w;
    swx += w * x;
    swy += w * y;
    swxx += w * x * x;
    swxy += w * x * y;
    ++used;
  }
  if (used < 3) throw CorrelateError("fit_exponential_tail: too few bins");
  const double denom = sw * swxx - swx * swx;
  if (!(std::abs(denom) > 0.0))
    throw CorrelateError("fit_exponential_tail: degenerate fit");
  const double slope = (sw * swxy - swx * swy) / denom;  // per ps
  if (!(slope < 0.0))
    throw CorrelateError("fit_exponential_tail: non-decaying tail");
  return -1e-12 / slope;
}

void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& hist) {
  out << "delay_ps,counts\n";
  for (std::int64_t i = 0; i < hist.nbins(); ++i)
    out << hist.delay_of_bin(i) << ','
        << hist.counts[static_cast<std::size_t>(i)] << '\n';
}

void write_g2_metrics(std::ostream& out, const G2Result& g2) {
  out << "g2_zero_integrated=" << g2.g2_zero_integrated << '\n'
      << "g2_zero_peak_max=" << g2.g2_zero_peak_max << '\n'
      << "side_peak_mean_area=" << g2.side_peak_mean_area << '\n';
}

}  // namespace qdt
