#include "qdt/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qdt {

namespace {

struct Simplex {
  std::vector<std::vector<double>> pts;
  std::vector<double> fvals;

  void sort() {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return fvals[a] < fvals[b];
    });
    std::vector<std::vector<double>> p2(pts.size());
    std::vector<double> f2(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      p2[i] = std::move(pts[order[i]]);
      f2[i] = fvals[order[i]];
    }
    pts = std::move(p2);
    fvals = std::move(f2);
  }
};

std::vector<double> blend(const std::vector<double>& a,
                          const std::vector<double>& b, double t) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
  return out;
}

}  // namespace

NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, const NelderMeadOptions& opts) {
  const std::size_t n = x0.size();
  NelderMeadResult result;
  result.x = x0;
  result.fx = f(x0);
  result.evals = 1;

  double scale = 0.0;
  for (double v : x0) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;

  for (int round = 0; round <= opts.restarts; ++round) {
    // Fresh simplex around the incumbent best, shrinking with each restart.
    const double step = scale * opts.init_step / (1 << round);
    Simplex s;
    s.pts.push_back(result.x);
    s.fvals.push_back(result.fx);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p = result.x;
      p[i] += step;
      s.pts.push_back(std::move(p));
      s.fvals.push_back(f(s.pts.back()));
      ++result.evals;
    }
    s.sort();

    bool round_converged = false;
    while (result.evals < opts.max_evals) {
      const double spread = s.fvals.back() - s.fvals.front();
      if (spread <= opts.tol * std::max(1.0, std::abs(s.fvals.front()))) {
        round_converged = true;
        break;
      }

      // Centroid of all but the worst vertex.
      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t v = 0; v + 1 < s.pts.size(); ++v)
          centroid[i] += s.pts[v][i];
        centroid[i] /= static_cast<double>(n);
      }

      const auto reflect = blend(centroid, s.pts.back(), -1.0);
      const double f_r = f(reflect);
      ++result.evals;

      if (f_r < s.fvals.front()) {
        const auto expand = blend(centroid, s.pts.back(), -2.0);
        const double f_e = f(expand);
        ++result.evals;
        if (f_e < f_r) {
          s.pts.back() = expand;
          s.fvals.back() = f_e;
        } else {
          s.pts.back() = reflect;
          s.fvals.back() = f_r;
        }
      } else if (f_r < s.fvals[s.fvals.size() - 2]) {
        s.pts.back() = reflect;
        s.fvals.back() = f_r;
      } else {
        const bool outside = f_r < s.fvals.back();
        const auto contract =
            blend(centroid, outside ? reflect : s.pts.back(), 0.5);
        const double f_c = f(contract);
        ++result.evals;
        if (f_c < std::min(f_r, s.fvals.back())) {
          s.pts.back() = contract;
          s.fvals.back() = f_c;
        } else {
          // Shrink toward the best vertex.
          for (std::size_t v = 1; v < s.pts.size(); ++v) {
            s.pts[v] = blend(s.pts.front(), s.pts[v], 0.5);
            s.fvals[v] = f(s.pts[v]);
            ++result.evals;
          }
        }
      }
      s.sort();
    }

    const bool improved = s.fvals.front() < result.fx;
    if (improved) {
      result.fx = s.fvals.front();
      result.x = s.pts.front();
    }
    result.converged = round_converged;
    if (round_converged && !improved && round > 0) break;
    if (result.evals >= opts.max_evals) break;
  }
  return result;
}

}  // namespace qdt
