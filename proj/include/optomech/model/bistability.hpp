#pragma once

#include <cstddef>
#include <vector>

#include "optomech/error.hpp"
#include "optomech/model/steady_state.hpp"
#include "optomech/response/drift.hpp"

namespace optomech::model {

struct BranchRoot {
  double p_trans = 0.0;
  int multiplicity = 1;
  response::Stability stability = response::Stability::Unstable;
  double max_real_eigenvalue = 0.0;
};

struct BistabilityPoint {
  double input_power = 0.0;  ///< eta0^2
  std::vector<BranchRoot> roots;
};

struct BistabilityCurve {
  std::vector<BistabilityPoint> points;
  std::vector<double> knees;  ///< input powers where the root count changes
};

/// Distinct physical roots at input power `ip` (ascending).
inline std::size_t root_count(const SystemParams& p, double ip, double rocking) {
  return solve_transmitted_power(p, std::sqrt(ip), rocking).size();
}

/// Root-count change inside (lo, hi), located by bisection on the count.
inline double refine_knee(const SystemParams& p, double rocking, double lo, double hi,
                          int iterations = 60) {
  const std::size_t n_lo = root_count(p, lo, rocking);
  for (int it = 0; it < iterations && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (root_count(p, mid, rocking) == n_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Steady-state S-curve over an ascending grid of input powers, with each
/// root labelled by linearized stability and root-count changes refined
/// into knee positions.
inline BistabilityCurve bistability_curve(const SystemParams& p, const std::vector<double>& input_grid,
                                          double rocking) {
  if (input_grid.size() < 2) throw Error(ErrorKind::DegenerateGrid, "input grid needs >= 2 points");
  for (std::size_t i = 0; i < input_grid.size(); ++i) {
    if (!(input_grid[i] >= 0) || !std::isfinite(input_grid[i]) ||
        (i > 0 && !(input_grid[i] > input_grid[i - 1]))) {
      throw Error(ErrorKind::DegenerateGrid, "input grid must be finite, >= 0 and strictly ascending");
    }
  }
  BistabilityCurve c;
  c.points.reserve(input_grid.size());
  for (double ip : input_grid) {
    const double eta0 = std::sqrt(ip);
    BistabilityPoint pt;
    pt.input_power = ip;
    for (const auto& r : solve_transmitted_power(p, eta0, rocking)) {
      const auto st = steady_state_from_ptrans(p, eta0, rocking, r.p_trans);
      const auto verdict = response::stability(response::drift_matrix(p, st));
      pt.roots.push_back({r.p_trans, r.multiplicity, verdict.verdict, verdict.max_real});
    }
    c.points.push_back(std::move(pt));
  }
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    if (c.points[i].roots.size() != c.points[i - 1].roots.size()) {
      c.knees.push_back(refine_knee(p, rocking, c.points[i - 1].input_power, c.points[i].input_power));
    }
  }
  return c;
}

}  // namespace optomech::model
