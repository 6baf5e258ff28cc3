#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "optomech/error.hpp"
#include "optomech/response/spectrum.hpp"

// Closed-form mirror spectrum S_q = (|K1|^2 + ... + |K5|^2) / |Dd|^2 with the
// coefficient polynomials transcribed term by term as published (typos
// included). Reference implementation only: the matrix route is the
// authority, and every disagreement is reported rather than repaired.
// docs/KNOWN_ERRATA.md lists the known transcription issues.

namespace optomech::response {

/// How the Brownian channel enters K1.
enum class BrownianWeighting {
  AsPrinted,    ///< gamma_m * coth(r w / 2), as published; diverges at w = 0
  Symmetrized,  ///< sqrt(gamma_m/omega_m * w coth(r w / 2)), amplitude of the matrix-route weight
};

inline constexpr std::string_view to_string(BrownianWeighting w) {
  return w == BrownianWeighting::AsPrinted ? "as-printed" : "symmetrized";
}

struct ClosedFormTerms {
  cplx dd{};
  std::array<cplx, 5> k{};
};

namespace detail {

struct CfInputs {
  double j, ka, kb, db, gm, wm, dl;
  cplx ap, am;  // a_plus and the published (imaginary) a_minus
};

inline CfInputs cf_inputs(const DriftMatrix& d, const SystemParams& p) {
  return {p.j_coupling, p.kappa_a, p.kappa_b, p.delta_b, p.gamma_m, p.omega_m, d.eff_detuning,
          cplx(d.amps.a_plus, 0.0), cplx(0.0, -d.amps.a_minus_i)};
}

// Bracket multiplying (-i w - gamma_m) in Dd.
inline cplx cf_p1(const CfInputs& c, double w) {
  const cplx i(0, 1);
  const double J = c.j, ka = c.ka, kb = c.kb, Db = c.db, Dl = c.dl;
  const double J2 = J * J, J4 = J2 * J2, w2 = w * w, w3 = w2 * w, w4 = w3 * w, w5 = w4 * w;
  return -i * J4 * w + 2.0 * i * J2 * w3 - i * w5 + 2 * J2 * w2 * ka - 2 * w4 * ka +
         i * w3 * ka * ka + 2 * J2 * w2 * kb - 2 * w4 * kb - 2.0 * i * J2 * w * ka * kb +
         4.0 * i * w3 * ka * kb + 2 * w2 * ka * ka * kb + i * w3 * kb * kb + 2 * w2 * ka * kb * kb -
         i * w * ka * ka * kb * kb + i * w3 * Dl * Dl + 2 * w2 * kb * Dl * Dl -
         i * w * kb * kb * Dl * Dl + 2.0 * i * J2 * w * Dl * Db + i * w3 * Db * Db +
         2 * w2 * ka * Db * Db - i * w * ka * ka * Db * Db - i * w * Dl * Dl * Db * Db;
}

// Optical part shared by the omega_m bracket of Dd and by K1.
inline cplx cf_optical(const CfInputs& c, double w) {
  const cplx i(0, 1);
  const double J = c.j, ka = c.ka, kb = c.kb, Db = c.db, Dl = c.dl, wm = c.wm;
  const double J2 = J * J, J4 = J2 * J2, w2 = w * w, w3 = w2 * w, w4 = w3 * w;
  return -J4 * wm + 2 * J2 * w2 * wm - w4 * wm - 2.0 * i * J2 * w * ka * wm +
         2.0 * i * w3 * ka * wm + w2 * ka * ka * wm - 2.0 * i * J2 * w * kb * wm +
         2.0 * i * w3 * kb * wm - 2 * J2 * ka * kb * wm + 4 * w2 * ka * kb * wm -
         2.0 * i * w * ka * ka * kb * wm + w2 * kb * kb * wm - 2.0 * i * w * ka * kb * kb * wm -
         ka * ka * kb * kb * wm + w2 * wm * Dl * Dl - 2.0 * i * w * kb * wm * Dl * Dl -
         kb * kb * wm * Dl * Dl + 2 * J2 * wm * Dl * Db + w2 * wm * Db * Db -
         2.0 * i * w * ka * wm * Db * Db - ka * ka * wm * Db * Db - wm * Dl * Dl * Db * Db;
}

// Optomechanical terms of the omega_m bracket of Dd, exponents as printed
// ("a+ kb^2 Delta" and "J^2 a-^2 Db^2 - J^2 a+^2 Db").
inline cplx cf_optomech(const CfInputs& c, double w) {
  const cplx i(0, 1);
  const double J = c.j, kb = c.kb, Db = c.db, Dl = c.dl;
  const double J2 = J * J, w2 = w * w;
  const cplx ap = c.ap, am = c.am, ap2 = ap * ap, am2 = am * am;
  return w2 * am2 * Dl - w2 * ap2 * Dl - 2.0 * i * w * am2 * kb * Dl + 2.0 * i * w * ap2 * kb * Dl -
         am2 * kb * kb * Dl + ap * kb * kb * Dl + J2 * am2 * Db * Db - J2 * ap2 * Db -
         am2 * Dl * Db * Db + ap2 * Dl * Db * Db;
}

}  // namespace detail

/// Dd and K1..K5 at one frequency.
inline ClosedFormTerms closed_form_terms(const SystemParams& p, const DriftMatrix& d,
                                         const NoiseModel& n, double w,
                                         BrownianWeighting weighting) {
  const auto c = detail::cf_inputs(d, p);
  const cplx i(0, 1);
  const double J = c.j, ka = c.ka, kb = c.kb, Db = c.db, Dl = c.dl, wm = c.wm;
  const double J2 = J * J, J3 = J2 * J, w2 = w * w, w3 = w2 * w;
  const cplx ap = c.ap, am = c.am;

  ClosedFormTerms t;
  const cplx optical = detail::cf_optical(c, w);
  t.dd = (-i * w - c.gm) * detail::cf_p1(c, w) - wm * (optical + detail::cf_optomech(c, w));

  const double x = 0.5 * n.thermal_ratio * w;
  if (weighting == BrownianWeighting::AsPrinted) {
    if (x == 0.0) {
      throw Error(ErrorKind::SingularResponse, "published K1 weight coth(0) diverges at omega=0");
    }
    t.k[0] = optical * n.gamma_m / std::tanh(x);
  } else {
    const double wsym = brownian_weight_symmetric(w, n.thermal_ratio);
    t.k[0] = optical * std::sqrt(n.gamma_m / n.omega_m * wsym);
  }

  t.k[1] = (-i * J3 * am * wm + i * J * w2 * am * wm + J * w * am * ka * wm + J * w * am * kb * wm -
            i * J * am * ka * kb * wm + i * J * w * ap * wm * Dl + J * ap * kb * wm * Dl +
            i * J * w * ap * wm * Db + J * ap * ka * wm * Db + i * J * am * wm * Dl * Db) *
           std::sqrt(kb);
  t.k[2] = (-J3 * ap * wm + J * w2 * ap * wm - i * J * w * ap * ka * wm - i * J * w * ap * kb * wm -
            J * ap * ka * kb * wm + J * w * am * wm * Dl - i * J * am * kb * wm * Dl +
            J * w * am * wm * Db - i * J * am * ka * wm * Db + J * ap * wm * Dl * Db) *
           std::sqrt(kb);
  t.k[3] = (-i * J2 * w * ap * wm + i * w3 * ap * wm + w2 * ap * ka * wm - J2 * ap * kb * wm +
            2.0 * w2 * ap * kb * wm - 2.0 * i * w * ap * ka * kb * wm - i * w * ap * kb * kb * wm -
            ap * ka * kb * kb * wm + i * w2 * am * wm * Dl + 2.0 * w * am * kb * wm * Dl -
            i * am * kb * kb * wm * Dl + i * J2 * am * wm * Db - i * w * ap * wm * Db * Db -
            ap * ka * wm * Db * Db - i * am * wm * Dl * Db * Db) *
           std::sqrt(ka);
  t.k[4] = wm * (ap * (-w2 * Dl + 2.0 * i * w * kb * Dl + kb * kb * Dl - J2 * Db + Dl * Db * Db) +
                 i * am * (-J * (i * J * w + J * kb))) +
           ((-i * w - ka) * (-w2 + 2.0 * i * w * kb + kb * kb + Db * Db)) * std::sqrt(ka);
  return t;
}

struct ClosedFormDeviation {
  double omega = 0.0;
  double closed = 0.0;
  double matrix = 0.0;
  double relative = 0.0;
};

struct ClosedFormResult {
  SpectrumSeries series;
  std::vector<ClosedFormDeviation> deviations;  ///< points deviating > 1% from the matrix route
  BrownianWeighting weighting = BrownianWeighting::Symmetrized;
};

/// Closed-form spectrum; every grid point deviating from the matrix route
/// by more than 1% relative is logged in `deviations`.
inline ClosedFormResult spectrum_closed_form(const SystemParams& p, const SteadyState& s,
                                             const NoiseModel& n, const std::vector<double>& grid,
                                             BrownianWeighting weighting = BrownianWeighting::Symmetrized) {
  const auto d = drift_matrix(p, s);
  detail::require_stable(d);
  const double mscale = std::max(1.0, d.m.cwiseAbs().maxCoeff());
  ClosedFormResult r;
  r.weighting = weighting;
  r.series.omega_grid = grid;
  r.series.s_q.reserve(grid.size());
  for (double w : grid) {
    const auto t = closed_form_terms(p, d, n, w, weighting);
    const double scale = std::pow(std::max(mscale, std::fabs(w)), 6);
    if (std::abs(t.dd) < 1e-14 * scale) {
      throw Error(ErrorKind::SingularResponse,
                  "closed-form denominator vanishes at omega=" + std::to_string(w));
    }
    double num = 0.0;
    for (const auto& k : t.k) num += std::norm(k);
    const double sq = num / std::norm(t.dd);
    r.series.s_q.push_back(sq);
    const double ref = spectrum_point(d, n, w).real();
    const double rel = std::fabs(sq - ref) / std::max(std::fabs(ref), 1e-300);
    if (!(rel <= 0.01)) r.deviations.push_back({w, sq, ref, rel});
  }
  return r;
}

/// One coefficient compared with its matrix-route counterpart.
struct CoefficientCheck {
  std::string name;
  double closed = 0.0;     ///< |coefficient| (K_k normalized by |det|)
  double reference = 0.0;  ///< matrix-route magnitude
  double relative = 0.0;
};

/// Term-by-term audit at one frequency. Dd is compared with
/// conj(det(-i w I - M)); K_k / |det| with the magnitude of the matching
/// channel response (K1: Brownian channel incl. its weight; K2, K3: cavity
/// B quadratures; K4, K5: cavity A quadratures).
inline std::array<CoefficientCheck, 6> audit_coefficients(const SystemParams& p, const SteadyState& s,
                                                          const NoiseModel& n, double w,
                                                          BrownianWeighting weighting) {
  const auto d = drift_matrix(p, s);
  const auto t = closed_form_terms(p, d, n, w, weighting);
  Eigen::Matrix<cplx, 6, 6> a = -d.m.cast<cplx>();
  for (int i = 0; i < 6; ++i) a(i, i) += cplx(0.0, -w);
  const cplx det = a.determinant();
  const auto x = channel_responses(d, n, w);

  auto rel = [](double got, double want) {
    return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
  };
  std::array<CoefficientCheck, 6> out;
  const cplx ref_dd = std::conj(det);
  out[0] = {"Dd", std::abs(t.dd), std::abs(ref_dd), std::abs(t.dd - ref_dd) / std::abs(ref_dd)};
  const double wz = std::sqrt(n.gamma_m / n.omega_m * brownian_weight_symmetric(w, n.thermal_ratio));
  const std::array<double, 5> refs{std::abs(x[0]) * wz, std::abs(x[1]), std::abs(x[2]),
                                   std::abs(x[3]), std::abs(x[4])};
  for (int k = 0; k < 5; ++k) {
    const double got = std::abs(t.k[k]) / std::abs(det);
    out[k + 1] = {"K" + std::to_string(k + 1), got, refs[k], rel(got, refs[k])};
  }
  return out;
}

}  // namespace optomech::response
