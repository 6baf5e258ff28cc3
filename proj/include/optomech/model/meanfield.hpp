#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include "optomech/model/params.hpp"

namespace optomech::model {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

/// Classical mean values: cavity fields a and b, QD coherence sigma_ge, and
/// mirror displacement / momentum. sigma_z is not dynamical (fixed to N).
struct MeanFieldState {
  cplx a{};
  cplx b{};
  cplx sigma{};
  double q = 0.0;
  double p = 0.0;
};

/// Time derivative of the mean values for drive amplitude `eta`. The
/// rocking offset adds chi*C to the radiation-pressure force, which is the
/// averaged effect of a fast drive modulation; pass 0 when the modulation is
/// integrated explicitly. Input-noise means vanish and the two-laser offset
/// is zero.
inline MeanFieldState meanfield_rhs(const SystemParams& sp, const MeanFieldState& s, double eta,
                                    double rocking = 0.0) {
  const double g_om = sp.omega_m * sp.chi;  // G
  const cplx pump = sp.lambda_pump * std::exp(-kI * sp.theta) * sp.n_inversion;
  MeanFieldState d;
  d.a = -kI * sp.delta_a * s.a - kI * sp.j_coupling * s.b + eta + kI * g_om * s.a * s.q -
        sp.kappa_a * s.a;
  d.b = -kI * sp.delta_b * s.b - kI * sp.g_qd * s.sigma - kI * sp.j_coupling * s.a -
        sp.kappa_b * s.b;
  d.sigma = (-kI * sp.delta_d - sp.kappa_d) * s.sigma + kI * sp.g_qd * s.b * sp.n_inversion -
            kI * pump;
  d.q = sp.omega_m * s.p;
  d.p = -sp.omega_m * s.q + g_om * (std::norm(s.a) + rocking) - sp.gamma_m * s.p;
  return d;
}

inline double max_abs(const MeanFieldState& s) {
  return std::max({std::abs(s.a), std::abs(s.b), std::abs(s.sigma), std::fabs(s.q),
                   std::fabs(s.p)});
}

}  // namespace optomech::model
