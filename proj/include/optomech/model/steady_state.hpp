#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "optomech/error.hpp"
#include "optomech/model/cubic.hpp"
#include "optomech/model/meanfield.hpp"
#include "optomech/model/params.hpp"

namespace optomech::model {

struct HelperConstants {
  double a1 = 0.0;
  double a2 = 0.0;
};

/// A1 = -g^2 N + kappa_b kappa_d - Delta_b Delta_d,
/// A2 = Delta_b kappa_d + kappa_b Delta_d.
/// A1 + i A2 = (kappa_b + i Delta_b)(kappa_d + i Delta_d) - g^2 N.
inline HelperConstants helper_constants(const SystemParams& p) {
  return {-p.g_qd * p.g_qd * p.n_inversion + p.kappa_b * p.kappa_d - p.delta_b * p.delta_d,
          p.delta_b * p.kappa_d + p.kappa_b * p.delta_d};
}

/// c3 P^3 + c2 P^2 + c1 P + c0 = 0 in the transmitted power P = |a_s|^2.
/// Derivation: docs/steady_state_derivation.md.
struct CubicCoefficients {
  double c3 = 0.0;
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  std::array<double, 4> as_array() const { return {c3, c2, c1, c0}; }
  double operator()(double x) const { return ((c3 * x + c2) * x + c1) * x + c0; }
};

inline CubicCoefficients cubic_coefficients(const SystemParams& p, double eta0, double rocking) {
  const auto [a1, a2] = helper_constants(p);
  const double amod2 = a1 * a1 + a2 * a2;
  const double j2 = p.j_coupling * p.j_coupling;
  const double shift = p.omega_m * p.chi * p.chi;          // optomechanical detuning per photon
  const double d0 = p.delta_a - shift * rocking;           // detuning at zero transmitted power
  const double x = p.kappa_a * a1 + j2 * p.kappa_d;
  const double y = p.kappa_a * a2 + j2 * p.delta_d;
  const double w = j2 * (p.delta_d * a1 - p.kappa_d * a2);
  const double qd = p.g_qd * p.j_coupling * p.lambda_pump * p.n_inversion;

  CubicCoefficients c;
  c.c3 = amod2 * shift * shift;
  c.c2 = -2.0 * shift * (amod2 * d0 + w);
  c.c1 = x * x + y * y + amod2 * d0 * d0 + 2.0 * d0 * w;
  c.c0 = -(eta0 * eta0 * amod2 +
           2.0 * eta0 * qd * (a2 * std::cos(p.theta) + a1 * std::sin(p.theta)) + qd * qd);
  return c;
}

struct TransmittedRoot {
  double p_trans = 0.0;
  int multiplicity = 1;
};

/// Physical (real, non-negative) solutions of the steady-state cubic,
/// ascending. Complex pairs are dropped, tiny negative roots clamped to 0.
inline std::vector<TransmittedRoot> solve_transmitted_power(const SystemParams& p, double eta0,
                                                            double rocking,
                                                            const RootTolerances& tol = {}) {
  const auto c = cubic_coefficients(p, eta0, rocking);
  const auto arr = c.as_array();
  for (double v : arr) {
    if (!std::isfinite(v)) throw Error(ErrorKind::DegenerateModel, "non-finite cubic coefficient");
  }
  if (arr[0] == 0 && arr[1] == 0 && arr[2] == 0 && arr[3] == 0) {
    throw Error(ErrorKind::DegenerateModel, "steady-state polynomial vanishes identically");
  }
  std::vector<TransmittedRoot> out;
  for (const auto& r : real_roots(arr, tol)) {
    if (r.value < -1e-12 * std::max(1.0, std::fabs(r.value))) continue;
    out.push_back({std::max(0.0, r.value), r.multiplicity});
  }
  return out;
}

struct SteadyState {
  cplx a_s{};
  cplx b_s{};
  cplx sigma_s{};  ///< mean QD coherence entering the field equations
  double q_s = 0.0;
  double p_s = 0.0;
  double p_trans = 0.0;
  double eff_detuning = 0.0;

  MeanFieldState as_meanfield() const { return {a_s, b_s, sigma_s, q_s, p_s}; }
};

namespace detail {

inline cplx qd_denominator(const SystemParams& p) { return {p.kappa_d, p.delta_d}; }

inline cplx qd_pump(const SystemParams& p) {
  return p.lambda_pump * std::exp(-kI * p.theta) * p.n_inversion;
}

// b and sigma given a, from the b and sigma equations at rest.
inline std::pair<cplx, cplx> slaved_modes(const SystemParams& p, cplx a) {
  const cplx dd = qd_denominator(p);
  const cplx denom = cplx(p.kappa_b, p.delta_b) - p.g_qd * p.g_qd * p.n_inversion / dd;
  if (std::abs(denom) < 1e-12) {
    throw Error(ErrorKind::SingularResponse, "vanishing cavity-B response denominator");
  }
  const cplx b = -(kI * p.j_coupling * a + p.g_qd * qd_pump(p) / dd) / denom;
  const cplx sigma = kI * p.n_inversion * (p.g_qd * b - p.lambda_pump * std::exp(-kI * p.theta)) / dd;
  return {b, sigma};
}

}  // namespace detail

/// Steady state on the branch with transmitted power `p_trans`.
inline SteadyState steady_state_from_ptrans(const SystemParams& p, double eta0, double rocking,
                                            double p_trans) {
  if (!(p_trans >= 0)) throw Error(ErrorKind::InvalidParams, "p_trans must be >= 0");
  const auto [a1, a2] = helper_constants(p);
  const cplx amp(a1, a2);
  const double shift = p.omega_m * p.chi * p.chi;
  const double detuning = p.delta_a - shift * p_trans - shift * rocking;
  const cplx denom = cplx(p.kappa_a, detuning) * amp +
                     p.j_coupling * p.j_coupling * detail::qd_denominator(p);
  if (std::abs(denom) < 1e-12) {
    throw Error(ErrorKind::SingularResponse, "vanishing cavity-A response denominator");
  }
  SteadyState s;
  s.a_s = (eta0 * amp + kI * p.j_coupling * p.g_qd * detail::qd_pump(p)) / denom;
  std::tie(s.b_s, s.sigma_s) = detail::slaved_modes(p, s.a_s);
  s.p_trans = std::norm(s.a_s);
  s.q_s = p.chi * (s.p_trans + rocking);
  s.p_s = 0.0;
  s.eff_detuning = detuning;
  return s;
}

/// Largest |d/dt| of the mean-field equations evaluated at `s` with a
/// constant drive eta0 and rocking offset.
inline double fixed_point_residual(const SystemParams& p, double eta0, double rocking,
                                   const SteadyState& s) {
  return max_abs(meanfield_rhs(p, s.as_meanfield(), eta0, rocking));
}

struct NewtonOptions {
  int max_iterations = 200;
  int max_halvings = 40;
  double residual_tol = 1e-10;
};

/// Fixed point of the mean-field equations found by damped Newton iteration
/// on the cavity-A amplitude, without using the cubic. The other modes are
/// eliminated by solving their linear rest equations numerically.
inline SteadyState steady_state_direct(const SystemParams& p, double eta0, double rocking,
                                       cplx initial_guess, const NewtonOptions& opt = {}) {
  if (!std::isfinite(initial_guess.real()) || !std::isfinite(initial_guess.imag())) {
    throw Error(ErrorKind::InvalidParams, "initial guess must be finite");
  }
  // Rest equations for (b, sigma):  M [b, sigma]^T = rhs0 + rhs1 * a
  Eigen::Matrix2cd m;
  m << -cplx(p.kappa_b, p.delta_b), -kI * p.g_qd,
      kI * p.g_qd * p.n_inversion, -cplx(p.kappa_d, p.delta_d);
  const Eigen::PartialPivLU<Eigen::Matrix2cd> lu(m);
  if (std::abs(m.determinant()) < 1e-14) {
    throw Error(ErrorKind::SingularResponse, "singular cavity-B / QD rest equations");
  }
  const Eigen::Vector2cd rhs0(0.0, kI * p.lambda_pump * std::exp(-kI * p.theta) * p.n_inversion);
  const Eigen::Vector2cd rhs1(kI * p.j_coupling, 0.0);
  const Eigen::Vector2cd z0 = lu.solve(rhs0);
  const Eigen::Vector2cd z1 = lu.solve(rhs1);
  const cplx beta0 = z0(0);
  const cplx beta1 = z1(0);

  const double shift = p.omega_m * p.chi * p.chi;
  const cplx lin = -cplx(p.kappa_a, p.delta_a) - kI * p.j_coupling * beta1;
  const cplx src = eta0 - kI * p.j_coupling * beta0;

  auto residual = [&](cplx a) { return (lin + kI * shift * (std::norm(a) + rocking)) * a + src; };

  const double scale = std::max(1.0, std::fabs(eta0));
  cplx a = initial_guess;
  cplx r = residual(a);
  bool converged = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (std::abs(r) <= 1e-14 * scale) {
      converged = true;
      break;
    }
    const cplx l = lin + kI * shift * (std::norm(a) + rocking);
    const cplx dx = l + kI * shift * 2.0 * a.real() * a;
    const cplx dy = kI * l + kI * shift * 2.0 * a.imag() * a;
    Eigen::Matrix2d jac;
    jac << dx.real(), dy.real(), dx.imag(), dy.imag();
    const double det = jac.determinant();
    if (det == 0.0 || !std::isfinite(det)) break;
    const Eigen::Vector2d step = jac.partialPivLu().solve(Eigen::Vector2d(-r.real(), -r.imag()));
    double lambda = 1.0;
    bool improved = false;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      const cplx trial = a + lambda * cplx(step(0), step(1));
      const cplx rt = residual(trial);
      if (std::abs(rt) < std::abs(r)) {
        a = trial;
        r = rt;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) {
      converged = std::abs(r) <= opt.residual_tol * scale;
      break;
    }
    if (std::abs(step(0)) + std::abs(step(1)) <= 1e-16 * std::max(1.0, std::abs(a))) {
      converged = std::abs(r) <= opt.residual_tol * scale;
      break;
    }
  }

  SteadyState s;
  s.a_s = a;
  s.b_s = beta0 + beta1 * a;
  s.sigma_s = z0(1) + z1(1) * a;
  s.p_trans = std::norm(a);
  s.q_s = p.chi * (s.p_trans + rocking);
  s.p_s = 0.0;
  s.eff_detuning = p.delta_a - shift * (s.p_trans + rocking);
  if (!converged || fixed_point_residual(p, eta0, rocking, s) > opt.residual_tol * scale) {
    throw Error(ErrorKind::NoConvergence, "damped Newton did not reach a fixed point");
  }
  return s;
}

}  // namespace optomech::model
