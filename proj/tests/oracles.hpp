#pragma once

// Brute-force references for the conformal operations. These recompute
// everything from scratch on plain sorted vectors and stay independent of
// the library's incremental structures.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

// Threshold by literal sort-then-index at level ceil(t(1-alpha))/(t-1).
inline double threshold(std::vector<double> scores, double alpha, std::size_t t) {
  const double inf = std::numeric_limits<double>::infinity();
  if (scores.empty()) return inf;
  std::sort(scores.begin(), scores.end());
  const double index = std::ceil(static_cast<double>(t) * (1.0 - alpha));
  const double level = index / static_cast<double>(t - 1);
  if (level > 1.0) return inf;
  if (level <= 0.0) return -inf;
  return scores[static_cast<std::size_t>(index) - 1];
}

// Largest grid point alpha at which the threshold still covers s_true.
inline double optimal_miscoverage_grid(const std::vector<double>& scores, double s_true,
                                       std::size_t t, double step) {
  double best = 0.0;
  const auto n_steps = static_cast<long>(std::llround(1.0 / step));
  for (long i = n_steps; i >= 0; --i) {
    const double alpha = static_cast<double>(i) * step;
    if (threshold(scores, alpha, t) >= s_true) {
      best = alpha;
      break;
    }
  }
  return best;
}

}  // namespace oracle
