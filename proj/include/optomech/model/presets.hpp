#pragma once

#include "optomech/model/params.hpp"

// Parameter sets used by the figure scenarios. Mechanical damping is not
// quoted for the bistability and spectrum sets; 0.01 is used there.
namespace optomech::model::presets {

/// Bistability set: J=0.5, chi=0.3, kappa_d=1.8, g=1, kappa_a=kappa_b=0.1,
/// Delta_a=Delta_b=1, Delta_d=0, N=0, theta=0.238, lambda=0.02.
inline SystemParams bistability() {
  SystemParams p;
  p.kappa_a = 0.1;
  p.kappa_b = 0.1;
  p.kappa_d = 1.8;
  p.gamma_m = 0.01;
  p.delta_a = 1.0;
  p.delta_b = 1.0;
  p.delta_d = 0.0;
  p.j_coupling = 0.5;
  p.g_qd = 1.0;
  p.chi = 0.3;
  p.lambda_pump = 0.02;
  p.theta = 0.238;
  p.n_inversion = 0.0;
  return p;
}

/// Switch-ratio set: J=1, g=0.5, gamma_m=1.8.
inline SystemParams switch_ratio_set() {
  SystemParams p = bistability();
  p.j_coupling = 1.0;
  p.g_qd = 0.5;
  p.gamma_m = 1.8;
  return p;
}

/// Gain / bandwidth set: J=0.5, g=1, kappa_d=1.8.
inline SystemParams gain_set() { return bistability(); }

/// Displacement-spectrum set; J and chi vary per panel.
inline SystemParams spectrum(double j_coupling, double chi) {
  SystemParams p = bistability();
  p.delta_d = -1.0;
  p.j_coupling = j_coupling;
  p.chi = chi;
  p.thermal_ratio = 1e-6;
  return p;
}

inline constexpr double kSpectrumEta0 = 0.1;
inline constexpr double kSpectrumRocking = 0.10;
inline constexpr double kSwitchEta0 = 0.1;

}  // namespace optomech::model::presets
