// Acceptance checks, one PASS/FAIL line per criterion.
//
//   acceptance                 run all criteria
//   acceptance --only N        run criterion N (exit 1 on FAIL)
//   acceptance --record DIR    also store each verdict line in DIR/criterion_N.txt
//   acceptance --collect DIR   print the stored verdicts; exit 1 unless all ten PASS
//
// Figure-trend criteria are evaluated faithfully; a FAIL there is a finding
// about the model, not a tolerance to tune.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "optomech/dynamics/hysteresis.hpp"
#include "optomech/dynamics/switching.hpp"
#include "optomech/model/bistability.hpp"
#include "optomech/model/presets.hpp"
#include "optomech/response/closed_form.hpp"
#include "optomech/response/peaks.hpp"
#include "optomech/runner/runner.hpp"
#include "../oracles.hpp"

namespace fs = std::filesystem;
using namespace optomech;
using model::cplx;
using model::SystemParams;

namespace {

struct Verdict {
  bool pass = false;
  std::string summary;
};

double rel(double a, double b) { return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300}); }

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

std::string join(const std::vector<double>& v, int prec = 4) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt(v[i], prec);
  return out;
}

void note(const std::string& s) { std::cout << "    " << s << "\n"; }

std::vector<double> uniform(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[std::size_t(i)] = lo + (hi - lo) * i / (n - 1);
  g.back() = hi;
  return g;
}

// --------------------------------------------------------------------------
// 1. Cubic roots vs Newton fixed points

Verdict oracle_equivalence() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> e(0.0, 1.0), c(0.0, 0.5), ang(0.0, 2 * std::numbers::pi), mag(0.0, 3.0);
  int roots = 0, newton_mismatch = 0, explained = 0, stray = 0, seeds_converged = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    const auto p = oracle::random_params(rng);
    const double eta0 = e(rng);
    const double rock = c(rng);
    const auto cubic = model::cubic_coefficients(p, eta0, rock);
    const auto found = model::solve_transmitted_power(p, eta0, rock);
    for (const auto& r : found) {
      ++roots;
      const auto s = model::steady_state_from_ptrans(p, eta0, rock, r.p_trans);
      bool ok = true;
      // library Newton (eliminated modes) and the 8-dimensional reference Newton
      try {
        const auto d = model::steady_state_direct(p, eta0, rock, s.a_s * cplx(1 + 1e-6, 1e-6));
        ok &= std::fabs(d.p_trans - r.p_trans) <= 1e-8 * std::max(r.p_trans, 1e-12);
      } catch (const Error&) {
        ok = false;
      }
      const auto fp = oracle::newton(p, eta0, rock, oracle::seed(p, s.a_s * cplx(1 + 1e-6, -1e-6), rock));
      ok &= fp.converged && std::fabs(oracle::p_trans(fp.x) - r.p_trans) <= 1e-8 * std::max(r.p_trans, 1e-12);
      if (ok) continue;
      // A mismatch is explained only at a (near-)double root, where Newton
      // loses quadratic convergence and the root itself is ill-conditioned.
      const double slope = std::fabs((3 * cubic.c3 * r.p_trans + 2 * cubic.c2) * r.p_trans + cubic.c1);
      const double scale = std::fabs(cubic.c1) + std::fabs(cubic.c2 * r.p_trans) + std::fabs(cubic.c3 * r.p_trans * r.p_trans);
      if (r.multiplicity > 1 || slope < 1e-6 * scale) {
        ++explained;
      } else {
        ++newton_mismatch;
        note("mismatch: draw " + std::to_string(draw) + " root " + fmt(r.p_trans, 12));
      }
    }
    // Fixed points reached from arbitrary seeds must lie on the cubic.
    for (int k = 0; k < 3; ++k) {
      try {
        const auto d = model::steady_state_direct(p, eta0, rock, std::polar(mag(rng), ang(rng)));
        ++seeds_converged;
        double best = 1e300;
        for (const auto& r : found) best = std::min(best, std::fabs(d.p_trans - r.p_trans) / std::max(r.p_trans, 1e-12));
        if (best > 1e-8) {
          ++stray;
          note("fixed point off the cubic: draw " + std::to_string(draw) + " P=" + fmt(d.p_trans, 12));
        }
      } catch (const Error&) {
      }
    }
  }
  note("physical roots checked: " + std::to_string(roots) + ", seeded fixed points: " + std::to_string(seeds_converged));
  note("explained (double-root) mismatches: " + std::to_string(explained));
  const int unexplained = newton_mismatch + stray;
  return {unexplained == 0, std::to_string(roots) + " roots over 1000 draws, " + std::to_string(unexplained) +
                                " unexplained mismatches"};
}

// --------------------------------------------------------------------------
// 2. Bistable window and knee trend with C

const std::vector<double> kKneeRocking{0.10, 0.36, 0.49};

std::vector<double> knee_grid() { return uniform(0.01, 1.2, 477); }

Verdict bistability_trend() {
  const auto p = model::presets::bistability();
  bool window = true, falling = true;
  double prev = 1e300;
  std::vector<double> uppers;
  for (double c : kKneeRocking) {
    const auto curve = model::bistability_curve(p, knee_grid(), c);
    const bool three = std::any_of(curve.points.begin(), curve.points.end(),
                                   [](const auto& pt) { return pt.roots.size() == 3; });
    window &= three;
    note("C=" + fmt(c, 3) + ": knees " + join(curve.knees, 7) + (three ? " (3-root window)" : " (no window)"));
    if (curve.knees.size() < 2) {
      falling = false;
      continue;
    }
    const double upper = curve.knees.back();
    uppers.push_back(upper);
    falling &= upper < prev;
    prev = upper;
  }
  return {window && falling, "upper knee vs C: " + join(uppers, 6) + (falling ? " (strictly decreasing)" : " (not decreasing)")};
}

// --------------------------------------------------------------------------
// 3. Branch stability

Verdict branch_stability() {
  const auto p = model::presets::bistability();
  int mid = 0, mid_unstable = 0, outer = 0, outer_stable = 0, excluded = 0;
  double worst = -1e300;
  for (double c : kKneeRocking) {
    const auto curve = model::bistability_curve(p, knee_grid(), c);
    int lower_unstable = 0, upper_unstable = 0;
    for (const auto& pt : curve.points) {
      const bool near_knee = std::any_of(curve.knees.begin(), curve.knees.end(),
                                         [&](double k) { return std::fabs(pt.input_power - k) < 1e-3 * k; });
      for (std::size_t k = 0; k < pt.roots.size(); ++k) {
        const auto& r = pt.roots[k];
        if (near_knee || r.multiplicity > 1 || std::fabs(r.max_real_eigenvalue) < 1e-9) {
          ++excluded;
          continue;
        }
        if (pt.roots.size() == 3 && k == 1) {
          ++mid;
          mid_unstable += r.stability == response::Stability::Unstable;
          continue;
        }
        ++outer;
        if (r.stability == response::Stability::Stable) {
          ++outer_stable;
        } else {
          // a lone root below the first knee is the lower branch, above the last the upper
          const bool lower = pt.roots.size() == 3 ? k == 0 : !curve.knees.empty() && pt.input_power < curve.knees.front();
          (lower ? lower_unstable : upper_unstable)++;
          worst = std::max(worst, r.max_real_eigenvalue);
        }
      }
    }
    note("C=" + fmt(c, 3) + ": unstable outer points lower/upper = " + std::to_string(lower_unstable) + "/" +
         std::to_string(upper_unstable));
  }
  const double frac = outer ? double(outer_stable) / outer : 0.0;
  note("excluded marginal points: " + std::to_string(excluded) + ", largest Re(lambda) on an unstable outer point: " +
       fmt(worst, 4));
  const bool pass = mid > 0 && mid_unstable == mid && frac >= 0.99;
  return {pass, "middle unstable " + std::to_string(mid_unstable) + "/" + std::to_string(mid) + ", outer stable " +
                    fmt(100 * frac, 4) + "% (" + std::to_string(outer_stable) + "/" + std::to_string(outer) + ")"};
}

// --------------------------------------------------------------------------
// 4. Normal-mode splitting peaks

response::SpectrumSeries preset_spectrum(double j, double chi) {
  const auto p = model::presets::spectrum(j, chi);
  const double eta0 = model::presets::kSpectrumEta0;
  const double c = model::presets::kSpectrumRocking;
  const auto roots = model::solve_transmitted_power(p, eta0, c);
  const auto s = model::steady_state_from_ptrans(p, eta0, c, roots.front().p_trans);
  auto series = response::spectrum_matrix(p, s, response::NoiseModel::from(p), response::linear_grid());
  series.peaks = response::detect_peaks(series);
  return series;
}

double value_at(const response::SpectrumSeries& s, double w) {
  const auto it = std::lower_bound(s.omega_grid.begin(), s.omega_grid.end(), w);
  return s.s_q[std::size_t(std::min<std::ptrdiff_t>(it - s.omega_grid.begin(), std::ptrdiff_t(s.s_q.size()) - 1))];
}

Verdict nms_peaks() {
  std::map<double, std::size_t> counts;
  for (double j : {0.0, 1.0, 1.5}) {
    const auto s = preset_spectrum(j, 0.2);
    counts[j] = s.peaks.size();
    std::vector<double> pos;
    for (const auto& pk : s.peaks) pos.push_back(pk.position);
    note("J=" + fmt(j, 2) + ", chi=0.2: " + std::to_string(s.peaks.size()) + " peak(s) at " + join(pos, 4));
  }
  const auto lo = preset_spectrum(0.5, 0.1);
  const auto hi = preset_spectrum(0.5, 0.2);
  std::set<double> locs;
  for (const auto& pk : lo.peaks) locs.insert(pk.position);
  for (const auto& pk : hi.peaks) locs.insert(pk.position);
  bool higher = !locs.empty();
  for (double w : locs) {
    const double a = value_at(hi, w), b = value_at(lo, w);
    note("J=0.5, omega=" + fmt(w, 4) + ": S_q(chi=0.2)=" + fmt(a, 4) + ", S_q(chi=0.1)=" + fmt(b, 4));
    higher &= a > b;
  }
  const bool three = counts[1.0] == 3 && counts[1.5] == 3 && counts[0.0] < 3;
  return {three && higher, "peak counts J=0/1/1.5: " + std::to_string(counts[0.0]) + "/" + std::to_string(counts[1.0]) +
                               "/" + std::to_string(counts[1.5]) + "; chi=0.2 above chi=0.1 at all peaks: " +
                               (higher ? "yes" : "no")};
}

// --------------------------------------------------------------------------
// 5. Spectrum positivity and reality

std::pair<SystemParams, model::SteadyState> random_stable(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> e(0.0, 1.0), c(0.0, 0.5);
  for (;;) {
    const auto p = oracle::random_params(rng);
    const double eta0 = e(rng), rock = c(rng);
    for (const auto& r : model::solve_transmitted_power(p, eta0, rock)) {
      const auto s = model::steady_state_from_ptrans(p, eta0, rock, r.p_trans);
      if (response::stability(response::drift_matrix(p, s)).verdict == response::Stability::Stable) return {p, s};
    }
  }
}

Verdict spectrum_physicality() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> logr(-14, 2);
  int negative = 0, complex_residue = 0, configs = 0;
  double worst_residue = 0, min_value = 1e300;
  const auto grid = response::linear_grid();
  for (int i = 0; i < 100; ++i) {
    auto [p, s] = random_stable(rng);
    p.thermal_ratio = std::exp(logr(rng));
    const auto d = response::drift_matrix(p, s);
    const auto n = response::NoiseModel::from(p);
    double max_re = 0, max_im = 0;
    for (double w : grid) {
      const cplx v = response::spectrum_point(d, n, w);
      negative += v.real() < 0;
      min_value = std::min(min_value, v.real());
      max_re = std::max(max_re, std::fabs(v.real()));
      max_im = std::max(max_im, std::fabs(v.imag()));
    }
    const double residue = max_im / max_re;
    worst_residue = std::max(worst_residue, residue);
    complex_residue += !(residue < 1e-12);
    ++configs;
  }
  note("smallest S_q value: " + fmt(min_value, 4));
  return {negative == 0 && complex_residue == 0,
          std::to_string(configs) + " configs x 2000 points: " + std::to_string(negative) + " negative values, worst " +
              "relative imaginary residue " + fmt(worst_residue, 3)};
}

// --------------------------------------------------------------------------
// 6. Closed-form audit

#ifndef OPTOMECH_ERRATA_PATH
#define OPTOMECH_ERRATA_PATH "docs/KNOWN_ERRATA.md"
#endif

Verdict closed_form_audit(const fs::path& report_dir) {
  std::ifstream f(OPTOMECH_ERRATA_PATH);
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string errata = ss.str();

  std::vector<std::pair<SystemParams, model::SteadyState>> configs;
  for (double j : {0.0, 1.0, 1.5}) {
    const auto p = model::presets::spectrum(j, 0.2);
    const auto r = model::solve_transmitted_power(p, 0.1, 0.1);
    configs.emplace_back(p, model::steady_state_from_ptrans(p, 0.1, 0.1, r.front().p_trans));
  }
  for (double chi : {0.1, 0.2}) {
    const auto p = model::presets::spectrum(0.5, chi);
    const auto r = model::solve_transmitted_power(p, 0.1, 0.1);
    configs.emplace_back(p, model::steady_state_from_ptrans(p, 0.1, 0.1, r.front().p_trans));
  }
  std::mt19937_64 rng(606);
  while (configs.size() < 20) {
    auto c = random_stable(rng);
    c.first.n_inversion = 0;  // keep the QD out of the fluctuation model
    const auto r = model::solve_transmitted_power(c.first, 0.4, 0.0);
    bool ok = false;
    for (const auto& x : r) {
      const auto s = model::steady_state_from_ptrans(c.first, 0.4, 0.0, x.p_trans);
      if (response::stability(response::drift_matrix(c.first, s)).verdict == response::Stability::Stable) {
        configs.emplace_back(c.first, s);
        ok = true;
        break;
      }
    }
    (void)ok;
  }

  std::ofstream report;
  if (!report_dir.empty()) {
    fs::create_directories(report_dir);
    report.open(report_dir / "closed_form_audit.csv");
    report << "config,weighting,omega[omega_m],S_q_closed_form[dimensionless],S_q[dimensionless],relative_deviation\n";
  }
  const auto grid = response::linear_grid(0.0125, 2.5, 200);
  std::set<std::string> tags;
  int evaluated = 0, points = 0, deviating = 0;
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    const auto& [p, s] = configs[ci];
    const auto n = response::NoiseModel::from(p);
    for (auto w : {response::BrownianWeighting::Symmetrized, response::BrownianWeighting::AsPrinted}) {
      const auto cf = response::spectrum_closed_form(p, s, n, grid, w);
      const auto d = response::drift_matrix(p, s);
      double worst = 0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ref = response::spectrum_point(d, n, grid[i]).real();
        const double r = rel(cf.series.s_q[i], ref);
        worst = std::max(worst, r);
        if (report.is_open()) {
          report << ci << "," << response::to_string(w) << "," << runner::format_double(grid[i]) << ","
                 << runner::format_double(cf.series.s_q[i]) << "," << runner::format_double(ref) << ","
                 << runner::format_double(r) << "\n";
        }
      }
      points += int(grid.size());
      deviating += int(cf.deviations.size());
      // Attribute each deviating frequency to the coefficients that disagree.
      for (const auto& dev : cf.deviations) {
        for (const auto& chk : response::audit_coefficients(p, s, n, dev.omega, w)) {
          if (chk.relative > 0.01) {
            tags.insert(chk.name == "K1" && w == response::BrownianWeighting::AsPrinted ? "K1-as-printed" : chk.name);
          }
        }
      }
      if (ci < 5 || w == response::BrownianWeighting::Symmetrized) {
        if (ci < 5) {
          note("config " + std::to_string(ci) + " (" + std::string(response::to_string(w)) + "): max deviation " +
               fmt(worst, 3) + ", " + std::to_string(cf.deviations.size()) + "/" + std::to_string(grid.size()) +
               " points > 1%");
        }
      }
    }
    ++evaluated;
  }
  std::vector<std::string> missing;
  std::string listed;
  for (const auto& t : tags) {
    listed += (listed.empty() ? "" : ", ") + t;
    if (errata.find("`closed-form:" + t + "`") == std::string::npos) missing.push_back(t);
  }
  note("deviating points: " + std::to_string(deviating) + "/" + std::to_string(points) +
       (report.is_open() ? " (per-frequency report: " + (report_dir / "closed_form_audit.csv").string() + ")" : ""));
  note("coefficients implicated: " + (listed.empty() ? std::string("none") : listed));
  for (const auto& m : missing) note("not itemized in KNOWN_ERRATA: " + m);
  const bool pass = evaluated == 20 && !errata.empty() && missing.empty();
  return {pass, std::to_string(evaluated) + " configurations audited; " + std::to_string(tags.size()) +
                    " deviating coefficient(s), " + std::to_string(missing.size()) + " not itemized"};
}

// --------------------------------------------------------------------------
// 7. Switch trends

struct TrendSeries {
  std::vector<double> x, ratio, gain;
  int aperiodic = 0, subharmonic = 0;
};

TrendSeries sweep_switch(const SystemParams& p, double eta0, const std::vector<double>& amps,
                         const std::vector<double>& omegas) {
  TrendSeries t;
  for (double a : amps) {
    for (double w : omegas) {
      const auto run = dynamics::run_switch(p, {eta0, a, w, std::nullopt});
      t.x.push_back(amps.size() > 1 ? a : w);
      t.ratio.push_back(run.metrics.switch_ratio);
      t.gain.push_back(run.metrics.gain);
      t.aperiodic += run.period_multiple == 0;
      t.subharmonic += run.period_multiple > 1;
    }
  }
  return t;
}

// Monotone with 5% ripple allowance.
bool decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > 1.05 * v[i - 1]) return false;
  }
  return v.back() < v.front();
}
bool increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < 0.95 * v[i - 1]) return false;
  }
  return v.back() > v.front();
}

// Rises, then the last-quartile slope is under 10% of the first-quartile slope.
bool saturating(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size(), q = n / 4;
  const double s0 = (y[q] - y[0]) / (x[q] - x[0]);
  const double s1 = (y[n - 1] - y[n - 1 - q]) / (x[n - 1] - x[n - 1 - q]);
  return s0 > 0 && std::fabs(s1) < 0.1 * s0;
}

Verdict switch_trends() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto amps = uniform(0.1, 1.0, 19);
  const auto omegas = uniform(0.5, 3.0, 26);
  const double eta0 = model::presets::kSwitchEta0;
  struct Set {
    const char* name;
    SystemParams p;
  };
  const Set sets[] = {{"switch-ratio parameter set (J=1, g=0.5, gamma_m=1.8)", model::presets::switch_ratio_set()},
                      {"gain parameter set (J=0.5, g=1)", model::presets::gain_set()}};
  bool verdicts[2][4] = {};
  for (int k = 0; k < 2; ++k) {
    const auto a = sweep_switch(sets[k].p, eta0, amps, {1.0});
    const auto w = sweep_switch(sets[k].p, eta0, {0.5}, omegas);
    verdicts[k][0] = decreasing(a.ratio);
    verdicts[k][1] = increasing(w.ratio);
    verdicts[k][2] = decreasing(a.gain);
    verdicts[k][3] = saturating(w.x, w.gain);
    note(std::string(sets[k].name) + ":");
    note("  ratio vs P_amp (Omega=1): " + join(a.ratio, 3) + (verdicts[k][0] ? "  [decreasing]" : "  [not decreasing]"));
    note("  ratio vs Omega (P_amp=0.5): " + join(w.ratio, 3) + (verdicts[k][1] ? "  [increasing]" : "  [not increasing]"));
    note("  gain vs P_amp: " + join(a.gain, 3) + (verdicts[k][2] ? "  [decreasing]" : "  [not decreasing]"));
    note("  gain vs Omega: " + join(w.gain, 3) + (verdicts[k][3] ? "  [rise then flat]" : "  [no saturation]"));
    note("  non-periodic runs: " + std::to_string(a.aperiodic + w.aperiodic) +
         ", subharmonic runs: " + std::to_string(a.subharmonic + w.subharmonic));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // Ratio trends are judged on the switch-ratio set, gain trends on the gain set.
  const bool r_amp = verdicts[0][0], r_om = verdicts[0][1], g_amp = verdicts[1][2], g_om = verdicts[1][3];
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  return {r_amp && r_om && g_amp && g_om && secs <= 600,
          std::string("ratio falls with P_amp: ") + yn(r_amp) + ", ratio rises with Omega: " + yn(r_om) +
              ", gain falls with P_amp: " + yn(g_amp) + ", gain rises then flattens: " + yn(g_om) + " (" +
              fmt(secs, 3) + " s)"};
}

// --------------------------------------------------------------------------
// 8. Small-signal gain

Verdict small_signal() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> e(0.1, 1.0);
  int tested = 0, agree = 0;
  double worst = 0;
  while (tested < 10) {
    const auto p = oracle::random_params(rng);
    const double eta0 = e(rng);
    const double ip = eta0 * eta0, h = 1e-5;
    // monostable across the modulation range and clearly damped
    bool mono = true;
    for (double x : {ip - 1e-2, ip, ip + 1e-2}) mono &= model::root_count(p, std::max(x, 0.0), 0.0) == 1;
    if (!mono || eta0 < 0.1) continue;
    const auto roots = model::solve_transmitted_power(p, eta0, 0.0);
    const auto st = model::steady_state_from_ptrans(p, eta0, 0.0, roots[0].p_trans);
    if (response::stability(response::drift_matrix(p, st)).max_real > -0.02) continue;

    const double up = model::solve_transmitted_power(p, std::sqrt(ip + h), 0.0).front().p_trans;
    const double dn = model::solve_transmitted_power(p, std::sqrt(ip - h), 0.0).front().p_trans;
    const double slope = std::fabs((up - dn) / (2 * h));
    dynamics::SwitchOptions o;
    o.transient_periods = 2;  // one period is 628 time units, far beyond relaxation
    o.measured_periods = 1;
    const auto run = dynamics::run_switch(p, {eta0, 1e-3, 1e-2, std::nullopt}, o);
    const double r = rel(run.metrics.gain, slope);
    worst = std::max(worst, r);
    agree += r <= 0.05;
    note("config " + std::to_string(tested) + ": gain " + fmt(run.metrics.gain, 6) + " vs dP/d(eta0^2) " + fmt(slope, 6));
    ++tested;
  }
  return {agree == tested, std::to_string(agree) + "/" + std::to_string(tested) +
                               " monostable configs within 5%, worst relative difference " + fmt(worst, 3)};
}

// --------------------------------------------------------------------------
// 9. Hysteresis jumps vs knees

Verdict hysteresis_knees() {
  const auto p = model::presets::bistability();
  const double c = 0.10;
  const auto knees = model::bistability_curve(p, uniform(0.02, 1.0, 981), c).knees;
  if (knees.size() != 2) return {false, "expected two knees, found " + std::to_string(knees.size())};
  const double k_down = knees[0], k_up = knees[1];
  note("cubic knees: " + fmt(k_down, 7) + " (down), " + fmt(k_up, 7) + " (up)");
  double e_up = 1e300, e_dn = 1e300;
  for (int steps : {100, 200, 400}) {
    dynamics::HysteresisSpec h;
    h.lo = 0.02;
    h.hi = 1.0;
    h.steps = steps;
    h.dwell = 200;
    h.rocking = c;
    const auto r = dynamics::hysteresis_sweep(p, h);
    e_up = r.jump_up ? rel(*r.jump_up, k_up) : 1e300;
    e_dn = r.jump_down ? rel(*r.jump_down, k_down) : 1e300;
    note(std::to_string(steps) + " steps: jump up " + (r.jump_up ? fmt(*r.jump_up, 6) : "none") + " (" +
         fmt(100 * e_up, 3) + "%), jump down " + (r.jump_down ? fmt(*r.jump_down, 6) : "none") + " (" +
         fmt(100 * e_dn, 3) + "%), loop area " + fmt(r.loop_area, 4));
  }
  // judged on the slowest ramp (rate halved twice)
  return {e_up <= 0.02 && e_dn <= 0.02,
          "finest ramp: jump-up off by " + fmt(100 * e_up, 3) + "%, jump-down off by " + fmt(100 * e_dn, 3) + "%"};
}

// --------------------------------------------------------------------------
// 10. Determinism and config round trip

#ifndef OPTOMECH_SCENARIO_DIR
#define OPTOMECH_SCENARIO_DIR "scenarios"
#endif

Verdict determinism() {
  int identical = 0, runs = 0;
  auto base = [] {
    runner::ScenarioConfig c;
    c.params = model::presets::bistability();
    c.drive.eta0 = 0.3;
    c.drive.rocking = 0.1;
    c.formats = {"csv", "json"};
    c.options.input_points = 80;
    c.options.omega_points = 300;
    c.options.transient_periods = 10;
    c.options.measured_periods = 3;
    c.options.steps = 20;
    c.options.dwell = 60;
    return c;
  };
  std::vector<runner::ScenarioConfig> cfgs;
  for (auto t : {runner::TaskKind::Bistability, runner::TaskKind::Spectrum, runner::TaskKind::Hysteresis}) {
    auto c = base();
    c.task = t;
    cfgs.push_back(c);
  }
  {
    auto c = base();
    c.task = runner::TaskKind::SwitchMetrics;
    c.params = model::presets::switch_ratio_set();
    c.drive = {0.1, 0.5, 1.0, std::nullopt};
    cfgs.push_back(c);
    c.task = runner::TaskKind::Sweep;
    c.sweep = runner::SweepSpec{runner::TaskKind::SwitchMetrics, "p_amp", {0.2, 0.5, 0.8}};
    cfgs.push_back(c);
  }
  for (const auto& c : cfgs) {
    const auto a = runner::render_scenario(c, 1).first.files();
    const auto b = runner::render_scenario(c, 3).first.files();
    ++runs;
    identical += a == b;
  }
  // raw traces
  const auto sp = model::presets::switch_ratio_set();
  dynamics::IntegrationOptions io;
  io.sample_dt = 0.05;
  const auto t1 = dynamics::integrate_meanfield(sp, {0.1, 0.7, 1.3, std::nullopt}, 0, 200, {}, io);
  const auto t2 = dynamics::integrate_meanfield(sp, {0.1, 0.7, 1.3, std::nullopt}, 0, 200, {}, io);
  const bool traces = t1.t.size() == t2.t.size() &&
                      std::memcmp(t1.output_power.data(), t2.output_power.data(), t1.output_power.size() * sizeof(double)) == 0;

  // round trip: random configs and every shipped scenario file
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> u(0.05, 1.5);
  int rt_ok = 0, rt = 0;
  for (int i = 0; i < 1000; ++i) {
    runner::ScenarioConfig c = base();
    for (const auto& f : model::kSystemFields) {
      if (f.name != "omega_m") c.params.*(f.member) = u(rng) * (f.name == "n_inversion" ? 0.5 : 1.0);
    }
    c.task = runner::TaskKind(i % 4);
    if (c.task == runner::TaskKind::SwitchMetrics) c.drive = {u(rng), u(rng), u(rng), std::nullopt};
    c.options.rel_tol = u(rng) * 1e-7;
    c.options.dwell = u(rng) * 100;
    c.options.omega_min = u(rng) / 3;
    if (i % 3 == 0) c.output = "results/run" + std::to_string(i);
    ++rt;
    try {
      rt_ok += runner::parse_config(runner::serialize_config(c)) == c;
    } catch (const Error& e) {
      note(std::string("round trip raised: ") + e.what());
    }
  }
  int files = 0, files_ok = 0;
  for (const auto& e : fs::directory_iterator(OPTOMECH_SCENARIO_DIR)) {
    if (e.path().extension() != ".ini") continue;
    std::ifstream f(e.path());
    std::ostringstream ss;
    ss << f.rdbuf();
    ++files;
    try {
      const auto c = runner::parse_config(ss.str());
      files_ok += runner::parse_config(runner::serialize_config(c)) == c;
    } catch (const Error& err) {
      note(e.path().filename().string() + ": " + err.what());
    }
  }
  note("scenario outputs identical (1 vs 3 jobs, repeated): " + std::to_string(identical) + "/" + std::to_string(runs));
  note("traces bit-identical: " + std::string(traces ? "yes" : "no"));
  note("round trips: " + std::to_string(rt_ok) + "/" + std::to_string(rt) + " random, " + std::to_string(files_ok) +
       "/" + std::to_string(files) + " shipped scenario files");
  const bool pass = identical == runs && traces && rt_ok == rt && files_ok == files && files > 0;
  return {pass, "byte-identical reruns " + std::to_string(identical) + "/" + std::to_string(runs) +
                    ", round trips " + std::to_string(rt_ok + files_ok) + "/" + std::to_string(rt + files)};
}

const char* kTitles[] = {"",
                         "oracle equivalence",
                         "bistability window and C trend",
                         "branch stability",
                         "three-peak normal-mode splitting",
                         "spectrum physicality",
                         "closed-form audit",
                         "switch trends",
                         "small-signal consistency",
                         "hysteresis vs cubic knees",
                         "determinism and round trip"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  std::string record, collect;
  app.add_option("--only", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  app.add_option("--record", record, "directory for per-criterion verdict files");
  app.add_option("--collect", collect, "print verdicts stored by earlier --record runs");
  CLI11_PARSE(app, argc, argv);

  if (!collect.empty()) {
    int passed = 0;
    for (int n = 1; n <= 10; ++n) {
      std::ifstream f(fs::path(collect) / ("criterion_" + std::to_string(n) + ".txt"));
      std::string line;
      if (!std::getline(f, line)) line = "FAIL " + std::to_string(n) + " " + kTitles[n] + ": not run";
      passed += line.rfind("PASS", 0) == 0;
      std::cout << line << "\n";
    }
    std::cout << passed << "/10 criteria pass\n";
    return passed == 10 ? 0 : 1;
  }

  const std::function<Verdict()> checks[] = {
      [] { return Verdict{}; },
      oracle_equivalence,
      bistability_trend,
      branch_stability,
      nms_peaks,
      spectrum_physicality,
      [&] { return closed_form_audit(record.empty() ? fs::path() : fs::path(record)); },
      switch_trends,
      small_signal,
      hysteresis_knees,
      determinism,
  };
  int failed = 0;
  for (int n = 1; n <= 10; ++n) {
    if (only && n != only) continue;
    std::cout << "criterion " << n << ": " << kTitles[n] << "\n";
    Verdict v;
    try {
      v = checks[n]();
    } catch (const std::exception& e) {
      v = {false, std::string("raised: ") + e.what()};
    }
    const std::string line =
        std::string(v.pass ? "PASS " : "FAIL ") + std::to_string(n) + " " + kTitles[n] + ": " + v.summary;
    std::cout << line << "\n" << std::flush;
    failed += !v.pass;
    if (!record.empty()) {
      fs::create_directories(record);
      std::ofstream(fs::path(record) / ("criterion_" + std::to_string(n) + ".txt")) << line << "\n";
    }
  }
  return failed ? 1 : 0;
}
