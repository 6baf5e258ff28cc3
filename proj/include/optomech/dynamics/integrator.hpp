#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_matrix.h>
#include <gsl/gsl_odeiv2.h>

#include "optomech/error.hpp"
#include "optomech/model/meanfield.hpp"
#include "optomech/model/params.hpp"

namespace optomech::dynamics {

using model::cplx;
using model::DriveConfig;
using model::MeanFieldState;
using model::SystemParams;

/// eta(t) = eta0 + p_amp cos(omega_mod t)
inline double drive_value(double t, const DriveConfig& d) {
  return d.eta0 + d.p_amp * std::cos(d.omega_mod * t);
}

struct TimeTrace {
  std::vector<double> t;
  std::vector<MeanFieldState> state;
  std::vector<double> output_power;  ///< |a(t)|^2
  std::vector<double> drive_power;   ///< eta(t)^2
  std::optional<double> implicit_switch_time;  ///< set if the stiff solver took over
};

struct IntegrationOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double sample_dt = 0.05;
  /// Static radiation-pressure offset (averaged model); 0 when the drive
  /// modulation is integrated explicitly.
  double rocking = 0.0;
  double blowup_limit = 1e8;
  double min_step = 1e-12;
  std::size_t max_steps = 50'000'000;
  bool allow_implicit = true;
};

namespace detail {

inline constexpr std::size_t kDim = 8;  // a, b, sigma (re, im), q, p
using State = std::array<double, kDim>;
using Jacobian = Eigen::Matrix<double, 8, 8>;

inline State pack(const MeanFieldState& s) {
  return {s.a.real(), s.a.imag(), s.b.real(), s.b.imag(), s.sigma.real(), s.sigma.imag(), s.q, s.p};
}

template <class V>
inline MeanFieldState unpack(const V& x) {
  return {cplx(x[0], x[1]), cplx(x[2], x[3]), cplx(x[4], x[5]), x[6], x[7]};
}

inline State rhs(const SystemParams& sp, const DriveConfig& d, double rocking, const State& x,
                 double t) {
  return pack(model::meanfield_rhs(sp, unpack(x), drive_value(t, d), rocking));
}

// Real 2x2 block of z -> c z.
inline void put_block(Jacobian& j, int row, int col, cplx c) {
  j(row, col) = c.real();
  j(row, col + 1) = -c.imag();
  j(row + 1, col) = c.imag();
  j(row + 1, col + 1) = c.real();
}

inline Jacobian jacobian(const SystemParams& sp, const State& x) {
  const cplx i(0.0, 1.0);
  const double g_om = sp.omega_m * sp.chi;
  Jacobian j = Jacobian::Zero();
  put_block(j, 0, 0, -sp.kappa_a + i * (g_om * x[6] - sp.delta_a));
  put_block(j, 0, 2, -i * sp.j_coupling);
  j(0, 6) = -g_om * x[1];
  j(1, 6) = g_om * x[0];
  put_block(j, 2, 2, cplx(-sp.kappa_b, -sp.delta_b));
  put_block(j, 2, 4, -i * sp.g_qd);
  put_block(j, 2, 0, -i * sp.j_coupling);
  put_block(j, 4, 4, cplx(-sp.kappa_d, -sp.delta_d));
  put_block(j, 4, 2, i * sp.g_qd * sp.n_inversion);
  j(6, 7) = sp.omega_m;
  j(7, 6) = -sp.omega_m;
  j(7, 7) = -sp.gamma_m;
  j(7, 0) = 2.0 * g_om * x[0];
  j(7, 1) = 2.0 * g_om * x[1];
  return j;
}

inline double spectral_radius(const Jacobian& j) {
  Eigen::EigenSolver<Jacobian> es(j, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline bool finite_and_bounded(const State& x, double limit) {
  for (double v : x) {
    if (!std::isfinite(v) || std::fabs(v) > limit) return false;
  }
  return true;
}

// Context handed to the GSL callbacks of the implicit stage.
struct GslContext {
  const SystemParams* sp;
  const DriveConfig* drive;
  double rocking;
};

inline int gsl_rhs(double t, const double y[], double dydt[], void* ctx) {
  const auto& c = *static_cast<const GslContext*>(ctx);
  State x{};
  std::copy(y, y + kDim, x.begin());
  const State d = rhs(*c.sp, *c.drive, c.rocking, x, t);
  for (std::size_t k = 0; k < kDim; ++k) {
    if (!std::isfinite(d[k])) return GSL_EBADFUNC;
    dydt[k] = d[k];
  }
  return GSL_SUCCESS;
}

inline int gsl_jac(double t, const double y[], double* dfdy, double dfdt[], void* ctx) {
  const auto& c = *static_cast<const GslContext*>(ctx);
  State x{};
  std::copy(y, y + kDim, x.begin());
  const auto jm = jacobian(*c.sp, x);
  gsl_matrix_view m = gsl_matrix_view_array(dfdy, kDim, kDim);
  for (std::size_t r = 0; r < kDim; ++r) {
    for (std::size_t col = 0; col < kDim; ++col) gsl_matrix_set(&m.matrix, r, col, jm(long(r), long(col)));
    dfdt[r] = 0.0;
  }
  dfdt[0] = -c.drive->p_amp * c.drive->omega_mod * std::sin(c.drive->omega_mod * t);
  return GSL_SUCCESS;
}

// GSL aborts on errors by default; status codes are checked instead.
inline void silence_gsl() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

// Uniform sample emission from dense output.
struct Sampler {
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t count = 0;
  std::size_t next = 0;
  double t_end = 0.0;
  double time(std::size_t k) const { return k + 1 == count ? t_end : t0 + dt * double(k); }
};

// dopri5 is stable only while h * rho(J) stays below ~3.3 on the negative
// real axis; persistent violation means step size is dictated by stability.
inline constexpr double kStiffnessRatio = 3.25;
inline constexpr int kStiffnessSteps = 15;
inline constexpr int kCalmSteps = 6;

}  // namespace detail

/// Integrates the mean-field equations from `init` at t0 to t1 with the
/// explicit drive modulation, returning samples on a uniform grid of
/// spacing opt.sample_dt (the last sample lands exactly on t1). Uses an
/// adaptive Dormand-Prince pair with dense output and hands over to an
/// implicit BDF method when the step size becomes stability-limited.
inline TimeTrace integrate_meanfield(const SystemParams& sp, const DriveConfig& drive, double t0,
                                     double t1, const MeanFieldState& init,
                                     const IntegrationOptions& opt = {}) {
  namespace odeint = boost::numeric::odeint;
  using detail::State;

  if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1)) {
    throw Error(ErrorKind::InvalidParams, "integration span must satisfy t1 > t0");
  }
  if (!(opt.sample_dt > 0)) throw Error(ErrorKind::InvalidParams, "sample_dt must be > 0");
  State x0 = detail::pack(init);
  if (!detail::finite_and_bounded(x0, opt.blowup_limit)) {
    throw Error(ErrorKind::InvalidParams, "initial state must be finite");
  }

  detail::Sampler smp;
  smp.t0 = t0;
  smp.dt = opt.sample_dt;
  smp.t_end = t1;
  smp.count = std::size_t(std::floor((t1 - t0) / opt.sample_dt + 1e-9)) + 1;
  if (t0 + opt.sample_dt * double(smp.count - 1) < t1 - 1e-9 * opt.sample_dt) ++smp.count;
  smp.count = std::max<std::size_t>(smp.count, 2);

  TimeTrace tr;
  tr.t.reserve(smp.count);
  tr.state.reserve(smp.count);
  auto emit = [&](double t, const State& x) {
    const auto s = detail::unpack(x);
    tr.t.push_back(t);
    tr.state.push_back(s);
    tr.output_power.push_back(std::norm(s.a));
    const double eta = drive_value(t, drive);
    tr.drive_power.push_back(eta * eta);
  };

  const double rocking = opt.rocking;
  auto sys = [&](const State& x, State& dxdt, double t) { dxdt = detail::rhs(sp, drive, rocking, x, t); };

  const double span = t1 - t0;
  double h0 = std::min(0.01, span / 10.0);
  std::size_t steps = 0;

  // Explicit stage: dopri5 dense output, watched for stability-limited steps.
  auto explicit_stepper =
      odeint::make_dense_output(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
  explicit_stepper.initialize(x0, t0, h0);
  emit(t0, x0);
  smp.next = 1;
  std::optional<std::pair<double, State>> stiff;
  int stiff_hits = 0, calm_run = 0;
  while (smp.next < smp.count) {
    const double t_prev = explicit_stepper.current_time();
    try {
      explicit_stepper.do_step(sys);
    } catch (const std::exception& e) {
      throw IntegrationError(std::string("step-size control failed: ") + e.what(), t_prev);
    }
    const double t_now = explicit_stepper.current_time();
    const double h = t_now - t_prev;
    const State xn = explicit_stepper.current_state();
    if (!detail::finite_and_bounded(xn, opt.blowup_limit)) {
      throw IntegrationError("state diverged", t_prev);
    }
    if (h < opt.min_step * std::max(1.0, std::fabs(t_now)) && t_now < t1) {
      throw IntegrationError("step size collapsed", t_prev);
    }
    if (++steps > opt.max_steps) throw IntegrationError("step budget exhausted", t_now);

    while (smp.next < smp.count && smp.time(smp.next) <= t_now) {
      const double ts = smp.time(smp.next);
      State xs{};
      explicit_stepper.calc_state(ts, xs);
      emit(ts, xs);
      ++smp.next;
    }
    if (opt.allow_implicit && smp.next < smp.count) {
      const double rho = detail::spectral_radius(detail::jacobian(sp, xn));
      // Hairer's counting rule: the step controller keeps h*rho hovering at
      // the stability boundary, so hits need not be consecutive.
      if (h * rho >= detail::kStiffnessRatio) {
        ++stiff_hits;
        calm_run = 0;
      } else if (++calm_run >= detail::kCalmSteps) {
        stiff_hits = 0;
      }
      if (stiff_hits >= detail::kStiffnessSteps) {
        stiff = std::make_pair(t_now, xn);
        break;
      }
    }
  }
  if (!stiff) return tr;

  // Stiff stage: variable-order BDF with the analytic Jacobian, stepped
  // straight onto each remaining sample time.
  tr.implicit_switch_time = stiff->first;
  detail::silence_gsl();
  detail::GslContext ctx{&sp, &drive, rocking};
  gsl_odeiv2_system gsys{detail::gsl_rhs, detail::gsl_jac, detail::kDim, &ctx};
  const std::unique_ptr<gsl_odeiv2_driver, decltype(&gsl_odeiv2_driver_free)> drv(
      gsl_odeiv2_driver_alloc_y_new(&gsys, gsl_odeiv2_step_msbdf,
                                    explicit_stepper.current_time_step(), opt.abs_tol, opt.rel_tol),
      &gsl_odeiv2_driver_free);
  if (!drv) throw IntegrationError("cannot allocate implicit solver", stiff->first);
  gsl_odeiv2_driver_set_hmin(drv.get(), opt.min_step);
  gsl_odeiv2_driver_set_nmax(drv.get(), opt.max_steps);

  // Samples before the hand-over time were already emitted from the dense
  // output; restart from the hand-over state.
  double t = stiff->first;
  State y = stiff->second;
  while (smp.next < smp.count) {
    const double ts = smp.time(smp.next);
    const double t_before = t;
    const int status = gsl_odeiv2_driver_apply(drv.get(), &t, ts, y.data());
    if (status != GSL_SUCCESS) {
      throw IntegrationError(std::string("implicit solver failed: ") + gsl_strerror(status), t_before);
    }
    if (!detail::finite_and_bounded(y, opt.blowup_limit)) throw IntegrationError("state diverged", t_before);
    emit(ts, y);
    ++smp.next;
  }
  return tr;
}

}  // namespace optomech::dynamics
