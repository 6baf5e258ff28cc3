#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "optomech/dynamics/switching.hpp"

namespace optomech::dynamics {

/// Staircase ramp in input power: `steps` equal increments from lo to hi and
/// back, each level held for `dwell` time units.
struct HysteresisSpec {
  double lo = 0.0;
  double hi = 1.0;
  int steps = 100;
  double dwell = 200.0;
  double rocking = 0.0;
  double rel_tol = 1e-8;
};

struct HysteresisPoint {
  double input_power = 0.0;
  double output_power = 0.0;  ///< mean |a|^2 over the late part of the dwell
};

struct HysteresisResult {
  std::vector<HysteresisPoint> up;    ///< ascending input power
  std::vector<HysteresisPoint> down;  ///< ascending input power (swept downward)
  std::optional<double> jump_up;      ///< input power of the upward jump
  std::optional<double> jump_down;    ///< input power of the downward jump
  double loop_area = 0.0;             ///< integral of (down - up) d(input power)
};

/// First abrupt rise walking a curve upward in input power: ratio > 1.5 and
/// more than 10x the previous increment. Located at the step midpoint; the
/// first step has no reference increment and is never a jump.
inline std::optional<double> find_jump(const std::vector<HysteresisPoint>& c) {
  for (std::size_t i = 2; i < c.size(); ++i) {
    const double lo = c[i - 1].output_power;
    const double hi = c[i].output_power;
    const double inc = hi - lo;
    const double prev = std::fabs(c[i - 1].output_power - c[i - 2].output_power);
    if (lo > 0 && hi / lo > 1.5 && inc > 10.0 * prev) {
      return 0.5 * (c[i - 1].input_power + c[i].input_power);
    }
  }
  return std::nullopt;
}

/// Quasi-static sweep of the averaged (rocked) mean-field model with a
/// constant drive at each level, starting on the lower branch at `lo`.
inline HysteresisResult hysteresis_sweep(const SystemParams& sp, const HysteresisSpec& h) {
  if (h.steps < 1 || !(h.hi > h.lo) || !(h.lo >= 0) || !(h.dwell > 0)) {
    throw Error(ErrorKind::DegenerateGrid, "hysteresis ramp needs steps >= 1, 0 <= lo < hi, dwell > 0");
  }
  const double mech_period = 2.0 * std::numbers::pi / sp.omega_m;
  // Average over whole mechanical periods in the last quarter of the dwell
  // so residual ringing cancels.
  const double avg_span = std::max(1.0, std::floor(0.25 * h.dwell / mech_period)) * mech_period;
  if (avg_span > h.dwell) throw Error(ErrorKind::DegenerateGrid, "dwell shorter than one mechanical period");

  IntegrationOptions io;
  io.rel_tol = h.rel_tol;
  io.abs_tol = h.rel_tol * 1e-2;
  io.rocking = h.rocking;
  io.sample_dt = mech_period / 64.0;

  std::vector<double> levels(std::size_t(h.steps) + 1);
  for (int k = 0; k <= h.steps; ++k) levels[std::size_t(k)] = h.lo + (h.hi - h.lo) * k / h.steps;
  levels.back() = h.hi;

  MeanFieldState x = lower_branch_state(sp, std::sqrt(h.lo), h.rocking);
  auto hold = [&](double ip) {
    const DriveConfig d{std::sqrt(ip), 0.0, 1.0, std::nullopt};
    auto settle = io;
    settle.sample_dt = h.dwell - avg_span;
    if (h.dwell - avg_span > 0) {
      x = integrate_meanfield(sp, d, 0.0, h.dwell - avg_span, x, settle).state.back();
    }
    const auto tr = integrate_meanfield(sp, d, 0.0, avg_span, x, io);
    x = tr.state.back();
    // Trapezoidal time average on the uniform samples.
    double acc = 0.0;
    for (std::size_t i = 1; i < tr.t.size(); ++i) {
      acc += 0.5 * (tr.output_power[i] + tr.output_power[i - 1]) * (tr.t[i] - tr.t[i - 1]);
    }
    return acc / (tr.t.back() - tr.t.front());
  };

  HysteresisResult r;
  for (double ip : levels) r.up.push_back({ip, hold(ip)});
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) r.down.push_back({*it, hold(*it)});
  std::reverse(r.down.begin(), r.down.end());

  r.jump_up = find_jump(r.up);
  r.jump_down = find_jump(r.down);
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const double d0 = r.down[i - 1].output_power - r.up[i - 1].output_power;
    const double d1 = r.down[i].output_power - r.up[i].output_power;
    r.loop_area += 0.5 * (d0 + d1) * (levels[i] - levels[i - 1]);
  }
  return r;
}

}  // namespace optomech::dynamics
