#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "optomech/error.hpp"

namespace optomech::model {

/// Physical parameters of the two-cavity + quantum-dot + mirror system.
/// Rates and detunings are in units of the mechanical frequency, which is
/// pinned to one internally.
struct SystemParams {
  double omega_m = 1.0;
  double kappa_a = 0.1;
  double kappa_b = 0.1;
  double kappa_d = 1.8;
  double gamma_m = 0.01;
  double delta_a = 1.0;
  double delta_b = 1.0;
  double delta_d = 0.0;
  double j_coupling = 0.0;
  double g_qd = 0.0;
  double chi = 0.0;
  double lambda_pump = 0.0;
  double theta = 0.0;
  double n_inversion = 0.0;  ///< <sigma_z>, held fixed
  double thermal_ratio = 1e-6;  ///< hbar*omega_m / (k_B T)

  bool operator==(const SystemParams&) const = default;
};

/// Modulated drive eta(t) = eta0 + p_amp * cos(omega_mod * t).
struct DriveConfig {
  double eta0 = 0.0;
  double p_amp = 0.0;
  double omega_mod = 1.0;
  /// Rocking parameter given directly instead of through p_amp / omega_mod.
  std::optional<double> rocking;

  double input_power() const { return eta0 * eta0; }

  bool operator==(const DriveConfig&) const = default;
};

struct ParamField {
  std::string_view name;
  double SystemParams::*member;
};

inline constexpr std::array<ParamField, 15> kSystemFields{{
    {"omega_m", &SystemParams::omega_m},
    {"kappa_a", &SystemParams::kappa_a},
    {"kappa_b", &SystemParams::kappa_b},
    {"kappa_d", &SystemParams::kappa_d},
    {"gamma_m", &SystemParams::gamma_m},
    {"delta_a", &SystemParams::delta_a},
    {"delta_b", &SystemParams::delta_b},
    {"delta_d", &SystemParams::delta_d},
    {"j_coupling", &SystemParams::j_coupling},
    {"g_qd", &SystemParams::g_qd},
    {"chi", &SystemParams::chi},
    {"lambda_pump", &SystemParams::lambda_pump},
    {"theta", &SystemParams::theta},
    {"n_inversion", &SystemParams::n_inversion},
    {"thermal_ratio", &SystemParams::thermal_ratio},
}};

inline const ParamField* find_system_field(std::string_view name) {
  for (const auto& f : kSystemFields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

/// Throws InvalidParams naming the first violated invariant.
inline void validate(const SystemParams& p) {
  auto fail = [](std::string_view field, std::string_view why) {
    throw Error(ErrorKind::InvalidParams, std::string(field) + ": " + std::string(why));
  };
  for (const auto& f : kSystemFields) {
    if (!std::isfinite(p.*f.member)) fail(f.name, "must be finite");
  }
  if (p.omega_m != 1.0) fail("omega_m", "must equal 1 (internal frequency unit)");
  if (p.kappa_a <= 0) fail("kappa_a", "decay rate must be > 0");
  if (p.kappa_b <= 0) fail("kappa_b", "decay rate must be > 0");
  if (p.kappa_d <= 0) fail("kappa_d", "decay rate must be > 0");
  if (p.gamma_m <= 0) fail("gamma_m", "decay rate must be > 0");
  if (p.thermal_ratio <= 0) fail("thermal_ratio", "must be > 0");
  if (p.n_inversion < -1 || p.n_inversion > 1) fail("n_inversion", "must lie in [-1, 1]");
  if (p.chi < 0) fail("chi", "must be >= 0");
  if (p.g_qd < 0) fail("g_qd", "must be >= 0");
  if (p.j_coupling < 0) fail("j_coupling", "must be >= 0");
}

inline void validate(const DriveConfig& d) {
  if (!std::isfinite(d.eta0) || !std::isfinite(d.p_amp) || !std::isfinite(d.omega_mod)) {
    throw Error(ErrorKind::InvalidDrive, "drive values must be finite");
  }
  if (d.p_amp < 0) throw Error(ErrorKind::InvalidDrive, "p_amp must be >= 0");
  if (d.rocking) {
    if (!std::isfinite(*d.rocking) || *d.rocking < 0) {
      throw Error(ErrorKind::InvalidDrive, "rocking must be finite and >= 0");
    }
    if (d.p_amp > 0) {
      throw Error(ErrorKind::InvalidDrive, "rocking given explicitly while p_amp > 0");
    }
  }
}

/// C = P_amp^2 / (2 Omega^2); an explicit `rocking` value wins.
inline double rocking_parameter(const DriveConfig& d) {
  if (d.rocking) return *d.rocking;
  if (d.p_amp == 0.0) return 0.0;
  if (!(d.omega_mod > 0)) {
    throw Error(ErrorKind::InvalidDrive, "p_amp > 0 requires omega_mod > 0");
  }
  const double c = d.p_amp * d.p_amp / (2.0 * d.omega_mod * d.omega_mod);
  if (!std::isfinite(c)) throw Error(ErrorKind::InvalidDrive, "rocking parameter is not finite");
  return c;
}

}  // namespace optomech::model
