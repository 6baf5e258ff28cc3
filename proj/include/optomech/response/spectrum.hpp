#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "optomech/error.hpp"
#include "optomech/response/drift.hpp"

namespace optomech::response {

/// Rates entering the input-noise correlations.
struct NoiseModel {
  double thermal_ratio = 1e-6;  ///< hbar omega_m / (k_B T)
  double gamma_m = 0.0;
  double omega_m = 1.0;
  double kappa_a = 0.0;
  double kappa_b = 0.0;

  static NoiseModel from(const SystemParams& p) {
    return {p.thermal_ratio, p.gamma_m, p.omega_m, p.kappa_a, p.kappa_b};
  }
};

/// omega * [1 + coth(r omega / 2)], with its finite limit 2/r + omega near 0.
inline double brownian_weight(double omega, double thermal_ratio) {
  const double x = 0.5 * thermal_ratio * omega;
  if (std::fabs(x) < 1e-6) {
    // omega*coth(x) = (2/r)(x coth x) = (2/r)(1 + x^2/3 - ...)
    return omega + (2.0 / thermal_ratio) * (1.0 + x * x / 3.0);
  }
  return omega * (1.0 + 1.0 / std::tanh(x));
}

/// Symmetrized Brownian weight omega*coth(r omega/2) (even in omega).
inline double brownian_weight_symmetric(double omega, double thermal_ratio) {
  return 0.5 * (brownian_weight(omega, thermal_ratio) + brownian_weight(-omega, thermal_ratio));
}

struct Peak {
  double position = 0.0;
  double height = 0.0;
  double prominence = 0.0;
};

struct SpectrumSeries {
  std::vector<double> omega_grid;
  std::vector<double> s_q;
  std::vector<Peak> peaks;
  double max_imag_residue = 0.0;  ///< relative to max(s_q)
};

/// Linear grid [lo, hi] with n points; default is the plotted band.
inline std::vector<double> linear_grid(double lo = 0.0, double hi = 2.5, std::size_t n = 2000) {
  if (n < 2 || !(hi > lo)) throw Error(ErrorKind::DegenerateGrid, "grid needs n >= 2 and hi > lo");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * double(i) / double(n - 1);
  g.back() = hi;
  return g;
}

/// Responses of q to each noise channel at frequency omega:
/// X_k = [(-i omega I - M)^{-1}]_{q,k} scaled by the input coefficient.
/// Order: zeta (p), u1_in, v1_in, u2_in, v2_in.
inline std::array<cplx, 5> channel_responses(const DriftMatrix& d, const NoiseModel& n,
                                             double omega) {
  using Matrix6c = Eigen::Matrix<cplx, 6, 6>;
  Matrix6c a = -d.m.cast<cplx>();
  for (int i = 0; i < 6; ++i) a(i, i) += cplx(0.0, -omega);
  // Row q of the inverse: solve A^T y = e_q.
  const Eigen::PartialPivLU<Matrix6c> lu(a.transpose());
  if (!(lu.rcond() > 1e-14)) {
    throw Error(ErrorKind::SingularResponse,
                "singular response matrix at omega=" + std::to_string(omega));
  }
  Eigen::Matrix<cplx, 6, 1> e = Eigen::Matrix<cplx, 6, 1>::Zero();
  e(0) = 1.0;
  const Eigen::Matrix<cplx, 6, 1> row = lu.solve(e);
  const double sb = std::sqrt(n.kappa_b);
  const double sa = std::sqrt(n.kappa_a);
  return {row(1), sb * row(2), sb * row(3), sa * row(4), sa * row(5)};
}

namespace detail {

// Correlation matrix of the five input channels at frequency w (per unit
// delta-normalization). The optical quadrature pairs carry the imaginary
// cross-correlations of vacuum input noise.
inline Eigen::Matrix<cplx, 5, 5> channel_correlations(const NoiseModel& n, double w) {
  Eigen::Matrix<cplx, 5, 5> c = Eigen::Matrix<cplx, 5, 5>::Zero();
  c(0, 0) = (n.gamma_m / n.omega_m) * brownian_weight(w, n.thermal_ratio);
  for (int k : {1, 3}) {
    c(k, k) = 1.0;
    c(k + 1, k + 1) = 1.0;
    c(k, k + 1) = cplx(0.0, 1.0);
    c(k + 1, k) = cplx(0.0, -1.0);
  }
  return c;
}

}  // namespace detail

/// Complex value of the symmetrized quadratic form at one frequency;
/// the imaginary part is numerical residue.
inline cplx spectrum_point(const DriftMatrix& d, const NoiseModel& n, double omega) {
  const auto x = channel_responses(d, n, omega);
  Eigen::Matrix<cplx, 5, 1> v;
  for (int k = 0; k < 5; ++k) v(k) = x[k];
  const auto cp = detail::channel_correlations(n, omega);
  const auto cm = detail::channel_correlations(n, -omega);
  const cplx fwd = (v.transpose() * cp * v.conjugate())(0, 0);
  const cplx bwd = (v.adjoint() * cm * v)(0, 0);
  return 0.5 * (fwd + bwd);
}

namespace detail {

inline void require_stable(const DriftMatrix& d) {
  const auto st = stability(d);
  if (st.verdict != Stability::Stable) {
    throw Error(ErrorKind::UnstableState,
                "spectrum requested on an unstable steady state (max Re lambda = " +
                    std::to_string(st.max_real) + ")");
  }
}

}  // namespace detail

/// Mirror displacement spectrum by inversion of the linear response.
/// Peaks are not filled in; see detect_peaks.
inline SpectrumSeries spectrum_matrix(const SystemParams& p, const SteadyState& s,
                                      const NoiseModel& n, const std::vector<double>& grid) {
  const auto d = drift_matrix(p, s);
  detail::require_stable(d);
  SpectrumSeries out;
  out.omega_grid = grid;
  out.s_q.reserve(grid.size());
  double max_s = 0.0;
  double max_im = 0.0;
  for (double w : grid) {
    const cplx v = spectrum_point(d, n, w);
    out.s_q.push_back(v.real());
    max_s = std::max(max_s, std::fabs(v.real()));
    max_im = std::max(max_im, std::fabs(v.imag()));
  }
  out.max_imag_residue = max_s > 0 ? max_im / max_s : max_im;
  if (out.max_imag_residue >= 1e-12) {
    throw Error(ErrorKind::SingularResponse, "spectrum has a non-negligible imaginary part");
  }
  return out;
}

}  // namespace optomech::response
