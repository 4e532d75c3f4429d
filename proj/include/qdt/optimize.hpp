#pragma once

#include <functional>
#include <vector>

// Derivative-free Nelder-Mead simplex minimizer for the low-dimensional
// likelihood surfaces used in state reconstruction.

namespace qdt {

struct NelderMeadOptions {
  double tol = 1e-10;       // stop when f spread <= tol * max(1, |f_best|)
  int max_evals = 100000;   // across all restarts
  double init_step = 0.1;   // relative initial simplex edge
  int restarts = 4;         // fresh simplex around the incumbent best
};

struct NelderMeadResult {
  std::vector<double> x;
  double fx = 0.0;
  int evals = 0;
  bool converged = false;
};

NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, const NelderMeadOptions& opts = {});

}  // namespace qdt
