#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "qdt/detection.hpp"
#include "qdt/qmath.hpp"

// Shared helpers for the test suites: random physical states, small
// statistics utilities, and the brute-force coincidence oracle.

namespace qdt::test {

inline Mat4c random_ginibre_density(std::mt19937_64& rng, int rank = 4) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd g(4, rank);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  Mat4c rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline Mat2c random_unitary2(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat2c g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<Mat2c> qr(g);
  Mat2c q = qr.householderQ();
  Mat2c r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < 2; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
  return q;
}

inline Mat4c kron2(const Mat2c& a, const Mat2c& b) {
  Mat4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

/// Two-sided Kolmogorov-Smirnov p-value against a continuous CDF.
inline double ks_p_value(std::vector<double> samples,
                         const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

/// Independent all-pairs coincidence histogram, naive O(n^2) double loop
/// with its own edge arithmetic.
inline std::vector<std::int64_t> brute_force_histogram(
    const std::vector<TimeTag>& tags, int start_ch, int stop_ch,
    std::int64_t width, std::int64_t range) {
  const std::int64_t m = range / width;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(2 * m + 1), 0);
  std::vector<std::int64_t> starts, stops;
  for (const TimeTag& t : tags) {
    if (t.channel == start_ch) starts.push_back(t.time_ps);
    if (t.channel == stop_ch) stops.push_back(t.time_ps);
  }
  for (std::size_t i = 0; i < starts.size(); ++i)
    for (std::size_t j = 0; j < stops.size(); ++j) {
      if (start_ch == stop_ch && i == j) continue;
      const std::int64_t d = stops[j] - starts[i];
      const std::int64_t mag = d < 0 ? -d : d;
      std::int64_t idx = (2 * mag + width) / (2 * width);
      if (d < 0) idx = -idx;
      if (idx < -m || idx > m) continue;
      ++counts[static_cast<std::size_t>(idx + m)];
    }
  return counts;
}

/// Simpson quadrature on [a, b].
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n = 2000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace qdt::test
