#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "optomech/model/params.hpp"
#include "optomech/model/steady_state.hpp"

namespace optomech::response {

using model::cplx;
using model::SteadyState;
using model::SystemParams;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// a_plus = sqrt(2) chi Re(a_s) and the real combination i*a_minus =
/// -sqrt(2) chi Im(a_s) (omega_m = 1 factors kept explicit).
struct FluctuationAmplitudes {
  double a_plus = 0.0;
  double a_minus_i = 0.0;
};

inline FluctuationAmplitudes fluctuation_amplitudes(const SteadyState& s, const SystemParams& p) {
  const double f = std::numbers::sqrt2 * p.omega_m * p.chi;
  return {f * s.a_s.real(), -f * s.a_s.imag()};
}

/// Linearized fluctuation dynamics over [q, p, u1, v1, u2, v2].
struct DriftMatrix {
  Matrix6 m = Matrix6::Zero();
  double eff_detuning = 0.0;
  FluctuationAmplitudes amps{};
};

inline DriftMatrix drift_matrix(const SystemParams& p, const SteadyState& s) {
  DriftMatrix d;
  d.eff_detuning = s.eff_detuning;
  d.amps = fluctuation_amplitudes(s, p);
  const double ap = d.amps.a_plus;
  const double ami = d.amps.a_minus_i;
  const double j = p.j_coupling;
  const double dl = s.eff_detuning;
  auto& m = d.m;
  m.setZero();
  m(0, 1) = p.omega_m;
  m(1, 0) = -p.omega_m;
  m(1, 1) = -p.gamma_m;
  m(1, 4) = ap;
  m(1, 5) = -ami;
  m(2, 2) = -p.kappa_b;
  m(2, 3) = p.delta_b;
  m(2, 5) = j;
  m(3, 2) = -p.delta_b;
  m(3, 3) = -p.kappa_b;
  m(3, 4) = -j;
  m(4, 0) = ami;
  m(4, 3) = j;
  m(4, 4) = -p.kappa_a;
  m(4, 5) = dl;
  m(5, 0) = ap;
  m(5, 2) = -j;
  m(5, 4) = -dl;
  m(5, 5) = -p.kappa_a;
  return d;
}

enum class Stability { Stable, Unstable };

inline constexpr std::string_view to_string(Stability s) {
  return s == Stability::Stable ? "stable" : "unstable";
}

struct StabilityResult {
  Stability verdict = Stability::Unstable;
  Eigen::Matrix<cplx, 6, 1> eigenvalues;
  double max_real = 0.0;
};

/// Stable iff every eigenvalue has real part below -1e-10.
inline StabilityResult stability(const DriftMatrix& d, double threshold = -1e-10) {
  Eigen::EigenSolver<Matrix6> es(d.m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::NoConvergence, "eigenvalue solver failed on drift matrix");
  }
  StabilityResult r;
  r.eigenvalues = es.eigenvalues();
  r.max_real = r.eigenvalues.real().maxCoeff();
  r.verdict = r.max_real < threshold ? Stability::Stable : Stability::Unstable;
  return r;
}

}  // namespace optomech::response
