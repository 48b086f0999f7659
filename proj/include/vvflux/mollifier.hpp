#pragma once

// Smooth regularizations of the Heaviside step, the Dirac delta, |x| and
// sign(x). Everything here is a pure function of its arguments.

#include <cmath>
#include <span>
#include <string>
#include <string_view>

#include "vvflux/errors.hpp"

namespace vvflux {

/// Transition profile omega: [-1,1] -> [0,1], clamped to 0 below -1 and 1 above.
/// Both profiles have an even derivative, so omega(z) + omega(-z) = 1.
enum class Transition {
  quintic,  ///< 1/2 + (15/16)z - (5/8)z^3 + (3/16)z^5, C^2
  septic,   ///< 1/2 + (35/32)(z - z^3 + (3/5)z^5 - (1/7)z^7), C^3
};

inline Transition parse_transition(std::string_view name) {
  if (name == "quintic") return Transition::quintic;
  if (name == "septic") return Transition::septic;
  throw UsageError("unknown transition profile '" + std::string(name) + "'");
}

namespace detail {

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite argument");
}

inline void require_positive_eps(double eps, const char* what) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw DomainError(std::string(what) + ": eps must be finite and > 0");
  }
}

/// Inner (|x| < eps) polynomial branches, also evaluated at the branch points in tests.
inline double reg_abs_inner(double x, double eps) {
  const double r = x / eps;
  const double r2 = r * r;
  // eps * r^2 * (15/8 - (5/4) r^2 + (3/8) r^4)
  return eps * r2 * (15.0 / 8.0 - r2 * (5.0 / 4.0 - r2 * (3.0 / 8.0)));
}

inline double sgn_eps_inner(double x, double eps) {
  const double r = x / eps;
  const double r2 = r * r;
  return r * (15.0 / 4.0 - r2 * (5.0 - r2 * (9.0 / 4.0)));
}

inline double reg_abs_curvature_inner(double x, double eps) {
  const double r = x / eps;
  const double r2 = r * r;
  return (15.0 / 4.0 - r2 * (15.0 - r2 * (45.0 / 4.0))) / eps;
}

}  // namespace detail

inline double transition_value(Transition kind, double z) {
  if (z <= -1.0) return 0.0;
  if (z >= 1.0) return 1.0;
  const double z2 = z * z;
  switch (kind) {
    case Transition::quintic:
      return 0.5 + z * (15.0 / 16.0 - z2 * (5.0 / 8.0 - z2 * (3.0 / 16.0)));
    case Transition::septic:
      return 0.5 + (35.0 / 32.0) * z * (1.0 - z2 * (1.0 - z2 * (3.0 / 5.0 - z2 / 7.0)));
  }
  return 0.0;
}

/// omega'(z). Depends on z only through z^2, so it is bit-exactly even.
inline double transition_slope(Transition kind, double z) {
  if (z <= -1.0 || z >= 1.0) return 0.0;
  const double w = 1.0 - z * z;
  switch (kind) {
    case Transition::quintic:
      return (15.0 / 16.0) * w * w;
    case Transition::septic:
      return (35.0 / 32.0) * w * w * w;
  }
  return 0.0;
}

/// The family H_eps(x) = omega(x / eps) together with delta_eps = H_eps'.
struct MollifierFamily {
  Transition kind = Transition::quintic;
  double eps = 0.1;

  MollifierFamily() = default;
  explicit MollifierFamily(double width, Transition k = Transition::quintic)
      : kind(k), eps(width) {
    detail::require_positive_eps(eps, "MollifierFamily");
  }
};

inline double heaviside_eps(double x, const MollifierFamily& fam) {
  detail::require_finite(x, "heaviside_eps");
  detail::require_positive_eps(fam.eps, "heaviside_eps");
  return transition_value(fam.kind, x / fam.eps);
}

inline double delta_eps(double x, const MollifierFamily& fam) {
  detail::require_finite(x, "delta_eps");
  detail::require_positive_eps(fam.eps, "delta_eps");
  return transition_slope(fam.kind, x / fam.eps) / fam.eps;
}

/// C^2 regularized absolute value: |x| outside (-eps, eps), a sextic blend inside.
inline double reg_abs(double x, double eps) {
  detail::require_positive_eps(eps, "reg_abs");
  const double ax = std::abs(x);
  if (ax >= eps) return ax;
  return detail::reg_abs_inner(x, eps);
}

/// Derivative of reg_abs. The outer branch owns |x| = eps. Not bounded by 1:
/// the blend overshoots to 7 / (3 sqrt 3) at |x| = eps / sqrt 3.
inline double sgn_eps(double x, double eps) {
  detail::require_positive_eps(eps, "sgn_eps");
  if (x >= eps) return 1.0;
  if (x <= -eps) return -1.0;
  return detail::sgn_eps_inner(x, eps);
}

/// Second derivative of reg_abs; zero outside (-eps, eps).
inline double reg_abs_curvature(double x, double eps) {
  detail::require_positive_eps(eps, "reg_abs_curvature");
  if (std::abs(x) >= eps) return 0.0;
  return detail::reg_abs_curvature_inner(x, eps);
}

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
inline double sgn_plus(double x) { return x > 0.0 ? 1.0 : 0.0; }
inline double sgn_minus(double x) { return x < 0.0 ? -1.0 : 0.0; }

/// Weight schedules a(eps) = eps^p and sigma(eps) = eps^(1/4) for the
/// interface concentration functional. Requires p in (0, 1/2) so that
/// eps / a(eps)^2 = eps^(1 - 2p) -> 0.
struct WeightSchedule {
  double p = 1.0 / 3.0;

  WeightSchedule() = default;
  explicit WeightSchedule(double exponent) : p(exponent) {
    if (!(p > 0.0 && p < 0.5)) throw DomainError("WeightSchedule: exponent p must lie in (0, 1/2)");
  }

  double a(double eps) const {
    detail::require_positive_eps(eps, "WeightSchedule::a");
    return std::pow(eps, p);
  }
  double sigma(double eps) const {
    detail::require_positive_eps(eps, "WeightSchedule::sigma");
    return std::pow(eps, 0.25);
  }
  double viscous_ratio(double eps) const {
    const double av = a(eps);
    return eps / (av * av);
  }

  /// True iff eps / a(eps)^2 strictly decreases along the (decreasing) sweep.
  bool ratio_vanishes_along(std::span<const double> eps_sweep) const {
    for (std::size_t i = 1; i < eps_sweep.size(); ++i) {
      if (!(viscous_ratio(eps_sweep[i]) < viscous_ratio(eps_sweep[i - 1]))) return false;
    }
    return true;
  }
};

}  // namespace vvflux
