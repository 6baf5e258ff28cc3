#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "optomech/dynamics/integrator.hpp"
#include "optomech/error.hpp"
#include "optomech/model/steady_state.hpp"

namespace optomech::dynamics {

/// Index range [first, last) of trace samples with t in [t_lo, t_hi].
struct MeasureWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> window_indices(const TimeTrace& tr, const MeasureWindow& w) {
  const auto lo = std::lower_bound(tr.t.begin(), tr.t.end(), w.t_lo - 1e-12 * std::max(1.0, std::fabs(w.t_lo)));
  const auto hi = std::upper_bound(tr.t.begin(), tr.t.end(), w.t_hi + 1e-12 * std::max(1.0, std::fabs(w.t_hi)));
  const auto a = std::size_t(lo - tr.t.begin());
  const auto b = std::size_t(hi - tr.t.begin());
  if (b < a + 2) throw Error(ErrorKind::DegenerateGrid, "measure window holds fewer than 2 samples");
  return {a, b};
}

inline std::pair<double, double> min_max(const std::vector<double>& v, std::size_t a, std::size_t b) {
  const auto [mn, mx] = std::minmax_element(v.begin() + long(a), v.begin() + long(b));
  return {*mn, *mx};
}

}  // namespace detail

/// max/min of the output power over the window.
inline double switch_ratio(const TimeTrace& tr, const MeasureWindow& w) {
  const auto [a, b] = detail::window_indices(tr, w);
  const auto [mn, mx] = detail::min_max(tr.output_power, a, b);
  if (!(mn > 1e-300 * std::max(1.0, mx))) {
    throw Error(ErrorKind::UndefinedMetric, "switch ratio undefined: output power reaches zero");
  }
  return mx / mn;
}

/// Half peak-to-peak of output power over half peak-to-peak of drive power.
inline double gain(const TimeTrace& tr, const MeasureWindow& w) {
  const auto [a, b] = detail::window_indices(tr, w);
  const auto [omn, omx] = detail::min_max(tr.output_power, a, b);
  const auto [imn, imx] = detail::min_max(tr.drive_power, a, b);
  if (!(imx - imn > 0)) throw Error(ErrorKind::UndefinedMetric, "gain undefined: no input modulation");
  return (omx - omn) / (imx - imn);
}

struct SwitchOptions {
  int transient_periods = 50;
  int measured_periods = 10;
  int samples_per_period = 400;
  int max_period_multiple = 8;
  double periodicity_tol = 1e-4;
  double rel_tol = 1e-8;
};

struct SwitchMetrics {
  double switch_ratio = 1.0;
  double gain = 0.0;
};

struct SwitchRun {
  TimeTrace trace;  ///< measured window only
  SwitchMetrics metrics;
  /// Smallest m such that the response repeats after m drive periods
  /// (1 = period 2 pi / Omega); 0 if none up to max_period_multiple.
  int period_multiple = 0;
  double periodicity_error = 0.0;
};

/// Lowest physical root of the unrocked steady state at drive eta.
inline MeanFieldState lower_branch_state(const SystemParams& sp, double eta, double rocking = 0.0) {
  const auto roots = model::solve_transmitted_power(sp, eta, rocking);
  if (roots.empty()) throw Error(ErrorKind::DegenerateModel, "no physical steady state");
  return model::steady_state_from_ptrans(sp, eta, rocking, roots.front().p_trans).as_meanfield();
}

namespace detail {

inline double state_distance(const MeanFieldState& x, const MeanFieldState& y) {
  return std::max({std::abs(x.a - y.a), std::abs(x.b - y.b), std::abs(x.sigma - y.sigma),
                   std::fabs(x.q - y.q), std::fabs(x.p - y.p)});
}

}  // namespace detail

/// Drives the system with eta(t) = eta0 + p_amp cos(Omega t) from the lower
/// branch at eta0, discards the transient and measures the last periods.
inline SwitchRun run_switch(const SystemParams& sp, const DriveConfig& drive, const SwitchOptions& o = {}) {
  if (!(drive.p_amp > 0)) throw Error(ErrorKind::InvalidDrive, "switch run needs p_amp > 0");
  if (!(drive.omega_mod > 0)) throw Error(ErrorKind::InvalidDrive, "switch run needs omega_mod > 0");
  if (o.transient_periods < 0 || o.measured_periods < 1 || o.samples_per_period < 8) {
    throw Error(ErrorKind::InvalidParams, "invalid switch-run window configuration");
  }
  const double period = 2.0 * std::numbers::pi / drive.omega_mod;
  const double t_meas = period * o.transient_periods;
  const double t_end = t_meas + period * o.measured_periods;

  IntegrationOptions io;
  io.rel_tol = o.rel_tol;
  io.abs_tol = o.rel_tol * 1e-2;
  io.sample_dt = period / o.samples_per_period;

  const auto init = lower_branch_state(sp, drive.eta0);
  MeanFieldState at_meas = init;
  if (o.transient_periods > 0) {
    auto pre = io;
    pre.sample_dt = period;  // only the end state is needed
    const auto tr = integrate_meanfield(sp, drive, 0.0, t_meas, init, pre);
    at_meas = tr.state.back();
  }

  SwitchRun run;
  run.trace = integrate_meanfield(sp, drive, t_meas, t_end, at_meas, io);
  const MeasureWindow w{t_meas, t_end};
  run.metrics.switch_ratio = switch_ratio(run.trace, w);
  run.metrics.gain = gain(run.trace, w);

  // Stroboscopic samples at multiples of the drive period.
  std::vector<MeanFieldState> strobe;
  double scale = 0.0;
  for (int k = 0; k <= o.measured_periods; ++k) {
    const std::size_t idx = std::min(run.trace.t.size() - 1, std::size_t(k) * std::size_t(o.samples_per_period));
    strobe.push_back(run.trace.state[idx]);
  }
  for (const auto& s : run.trace.state) scale = std::max(scale, model::max_abs(s));
  scale = std::max(scale, 1e-300);
  const int m_max = std::min(o.max_period_multiple, o.measured_periods);
  run.periodicity_error = 0.0;
  for (int m = 1; m <= m_max; ++m) {
    double err = 0.0;
    for (std::size_t i = 0; i + std::size_t(m) < strobe.size(); ++i) {
      err = std::max(err, detail::state_distance(strobe[i], strobe[i + std::size_t(m)]) / scale);
    }
    if (m == 1) run.periodicity_error = err;
    if (err <= o.periodicity_tol) {
      run.period_multiple = m;
      run.periodicity_error = err;
      break;
    }
  }
  return run;
}

struct BandwidthResult {
  std::vector<double> omega_grid;
  std::vector<double> gains;
  double gain_max = 0.0;
  double bandwidth = 0.0;  ///< measure of {Omega : gain >= gain_max / sqrt(2)}
};

/// -3 dB measure of a sampled gain curve; crossings are linearly
/// interpolated between grid points.
inline double half_power_measure(const std::vector<double>& x, const std::vector<double>& g) {
  if (x.size() < 2 || x.size() != g.size()) throw Error(ErrorKind::DegenerateGrid, "need >= 2 samples");
  const double gmax = *std::max_element(g.begin(), g.end());
  if (!(gmax > 0)) return 0.0;
  const double thr = gmax / std::numbers::sqrt2;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double y0 = g[i] - thr;
    const double y1 = g[i + 1] - thr;
    const double dx = x[i + 1] - x[i];
    if (y0 >= 0 && y1 >= 0) {
      total += dx;
    } else if (y0 >= 0 || y1 >= 0) {
      const double frac = y0 / (y0 - y1);  // crossing position from x[i]
      total += y0 >= 0 ? frac * dx : (1.0 - frac) * dx;
    }
  }
  return total;
}

inline BandwidthResult bandwidth(const SystemParams& sp, double eta0, double p_amp,
                                 const std::vector<double>& omega_grid, const SwitchOptions& o = {}) {
  if (omega_grid.size() < 20) throw Error(ErrorKind::DegenerateGrid, "bandwidth needs >= 20 Omega points");
  for (std::size_t i = 0; i < omega_grid.size(); ++i) {
    if (!(omega_grid[i] > 0) || (i > 0 && !(omega_grid[i] > omega_grid[i - 1]))) {
      throw Error(ErrorKind::DegenerateGrid, "Omega grid must be positive and strictly ascending");
    }
  }
  BandwidthResult r;
  r.omega_grid = omega_grid;
  for (double om : omega_grid) {
    r.gains.push_back(run_switch(sp, {eta0, p_amp, om, std::nullopt}, o).metrics.gain);
  }
  r.gain_max = *std::max_element(r.gains.begin(), r.gains.end());
  r.bandwidth = half_power_measure(r.omega_grid, r.gains);
  return r;
}

}  // namespace optomech::dynamics
