#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "optomech/response/spectrum.hpp"

namespace optomech::response {

/// Interior local maxima whose topographic prominence is at least
/// `min_rel_prominence` of the global maximum. Grid endpoints are never
/// peaks. Plateaus count once, at their left edge. A flat or empty series
/// yields no peaks.
inline std::vector<Peak> detect_peaks(const std::vector<double>& x, const std::vector<double>& y,
                                      double min_rel_prominence = 0.01) {
  std::vector<Peak> out;
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 3) return out;
  const double gmax = *std::max_element(y.begin(), y.begin() + n);
  if (!(gmax > 0)) return out;

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1])) continue;
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 >= n || !(y[j + 1] < y[i])) continue;

    // Prominence: height above the higher of the two lowest points reached
    // before meeting strictly higher ground on either side.
    double left_min = y[i];
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] > y[i]) break;
      left_min = std::min(left_min, y[k]);
    }
    double right_min = y[i];
    for (std::size_t k = j + 1; k < n; ++k) {
      if (y[k] > y[i]) break;
      right_min = std::min(right_min, y[k]);
    }
    const double prom = y[i] - std::max(left_min, right_min);
    if (prom >= min_rel_prominence * gmax) out.push_back({x[i], y[i], prom});
    i = j;
  }
  return out;
}

inline std::vector<Peak> detect_peaks(const SpectrumSeries& s, double min_rel_prominence = 0.01) {
  return detect_peaks(s.omega_grid, s.s_q, min_rel_prominence);
}

}  // namespace optomech::response
