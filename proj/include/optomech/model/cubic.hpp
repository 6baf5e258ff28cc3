#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace optomech::model {

struct RealRoot {
  double value = 0.0;
  int multiplicity = 1;
};

struct RootTolerances {
  /// Roots closer than merge * max(1, |root|) are reported once.
  double merge = 1e-8;
  /// Scaled monic discriminant inside +-knee counts as a double root.
  double knee = 1e-10;
};

namespace detail {

using Ld = long double;

inline Ld eval_monic(Ld b, Ld c, Ld d, Ld y) { return ((y + b) * y + c) * y + d; }
inline Ld eval_monic_deriv(Ld b, Ld c, Ld y) { return (3 * y + 2 * b) * y + c; }

// Newton polish of a simple root of y^3 + b y^2 + c y + d.
inline Ld polish(Ld b, Ld c, Ld d, Ld y) {
  for (int it = 0; it < 12; ++it) {
    const Ld f = eval_monic(b, c, d, y);
    const Ld df = eval_monic_deriv(b, c, y);
    if (df == 0) break;
    const Ld step = f / df;
    const Ld next = y - step;
    // Accept only if the residual does not grow.
    if (std::fabs(eval_monic(b, c, d, next)) > std::fabs(f)) break;
    y = next;
    if (std::fabs(step) <= 1e-19L * std::max<Ld>(1, std::fabs(y))) break;
  }
  return y;
}

inline std::vector<RealRoot> merge_sorted(std::vector<RealRoot> roots, double tol) {
  std::sort(roots.begin(), roots.end(),
            [](const RealRoot& l, const RealRoot& r) { return l.value < r.value; });
  std::vector<RealRoot> out;
  for (const auto& r : roots) {
    if (!out.empty() &&
        std::fabs(r.value - out.back().value) <= tol * std::max(1.0, std::fabs(r.value))) {
      auto& prev = out.back();
      const int m = prev.multiplicity + r.multiplicity;
      prev.value = (prev.value * prev.multiplicity + r.value * r.multiplicity) / m;
      prev.multiplicity = m;
    } else {
      out.push_back(r);
    }
  }
  return out;
}

inline std::vector<RealRoot> quadratic_roots(double a, double b, double c, double merge_tol) {
  // a x^2 + b x + c, a != 0
  const double disc = b * b - 4 * a * c;
  if (disc < 0) {
    const double scale = std::max({b * b, std::fabs(4 * a * c)});
    if (disc < -1e-14 * scale) return {};
    return {{-b / (2 * a), 2}};
  }
  const double s = std::sqrt(disc);
  const double q = -0.5 * (b + std::copysign(s, b));
  std::vector<RealRoot> r;
  if (q != 0) {
    r.push_back({q / a, 1});
    r.push_back({c / q, 1});
  } else {
    r.push_back({0.0, 2});
  }
  return merge_sorted(std::move(r), merge_tol);
}

}  // namespace detail

/// Real roots of c[0] x^3 + c[1] x^2 + c[2] x + c[3], ascending, with
/// near-coincident roots merged. Leading zeros lower the degree. The
/// all-zero polynomial yields an empty list; callers decide whether that
/// is an error.
inline std::vector<RealRoot> real_roots(const std::array<double, 4>& c,
                                        const RootTolerances& tol = {}) {
  using detail::Ld;
  if (c[0] == 0.0) {
    if (c[1] != 0.0) return detail::quadratic_roots(c[1], c[2], c[3], tol.merge);
    if (c[2] != 0.0) return {{-c[3] / c[2], 1}};
    return {};
  }

  const Ld b = Ld(c[1]) / c[0];
  const Ld cc = Ld(c[2]) / c[0];
  const Ld d = Ld(c[3]) / c[0];

  // Rescale so that all roots are O(1): x = s*y.
  Ld s = std::max({std::fabs(b), std::sqrt(std::fabs(cc)), std::cbrt(std::fabs(d))});
  if (s == 0) return {{0.0, 3}};
  const Ld B = b / s;
  const Ld C = cc / (s * s);
  const Ld D = d / (s * s * s);

  const Ld disc = 18 * B * C * D - 4 * B * B * B * D + B * B * C * C - 4 * C * C * C - 27 * D * D;

  // Depressed cubic t^3 + p t + q, y = t - B/3.
  const Ld p = C - B * B / 3;
  const Ld q = 2 * B * B * B / 27 - B * C / 3 + D;
  const Ld shift = -B / 3;

  std::vector<RealRoot> roots;
  if (std::fabs(disc) <= tol.knee) {
    if (std::fabs(p) < 1e-12L) {
      roots.push_back({double(s * shift), 3});
    } else {
      const Ld simple = 3 * q / p + shift;
      Ld dbl = -3 * q / (2 * p) + shift;
      // The double root is also a root of the derivative; refine there.
      for (int it = 0; it < 8; ++it) {
        const Ld f1 = detail::eval_monic_deriv(B, C, dbl);
        const Ld f2 = 6 * dbl + 2 * B;
        if (f2 == 0) break;
        dbl -= f1 / f2;
      }
      roots.push_back({double(s * detail::polish(B, C, D, simple)), 1});
      roots.push_back({double(s * dbl), 2});
    }
  } else if (disc > 0) {
    const Ld m = 2 * std::sqrt(-p / 3);
    Ld arg = 3 * q / (p * m);  // = (3q / 2p) * sqrt(-3/p)
    arg = std::clamp<Ld>(arg, -1, 1);
    const Ld phi = std::acos(arg) / 3;
    for (int k = 0; k < 3; ++k) {
      const Ld t = m * std::cos(phi - 2 * std::numbers::pi_v<Ld> * k / 3);
      roots.push_back({double(s * detail::polish(B, C, D, t + shift)), 1});
    }
  } else {
    const Ld inner = std::sqrt(q * q / 4 + p * p * p / 27);
    const Ld u = -std::copysign(std::cbrt(std::fabs(q) / 2 + inner), q);
    const Ld t = (u != 0) ? u - p / (3 * u) : 0;
    roots.push_back({double(s * detail::polish(B, C, D, t + shift)), 1});
  }
  return detail::merge_sorted(std::move(roots), tol.merge);
}

}  // namespace optomech::model
