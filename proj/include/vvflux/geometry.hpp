#pragma once

// The discontinuity surface D = { x : x_1 = phi(x_hat_1) }, its signed offset,
// axis-aligned boxes and the interface bands A_eta.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vvflux/errors.hpp"

namespace vvflux {

using Point = std::vector<double>;

/// Q^d(K) = [-K, K]^d.
struct Box {
  double K = 1.0;
  int dim = 1;

  Box() = default;
  Box(double half_width, int d) : K(half_width), dim(d) {
    if (!(K > 0.0)) throw UsageError("Box: half-width K must be > 0");
    if (d < 1) throw UsageError("Box: dimension must be >= 1");
  }
  bool contains(std::span<const double> x) const {
    return std::all_of(x.begin(), x.end(), [&](double v) { return std::abs(v) <= K; });
  }
};

/// x with its k-th component (1-based) replaced by a.
inline Point replace_component(std::span<const double> x, int k, double a) {
  if (k < 1 || k > static_cast<int>(x.size())) {
    throw UsageError("replace_component: axis " + std::to_string(k) + " out of range 1.." +
                     std::to_string(x.size()));
  }
  Point out(x.begin(), x.end());
  out[static_cast<std::size_t>(k - 1)] = a;
  return out;
}

/// x_hat_k: x with the k-th component (1-based) removed, written into `out`.
inline void transverse_into(std::span<const double> x, int k, std::span<double> out) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (static_cast<int>(i) + 1 != k) out[j++] = x[i];
  }
}

inline Point transverse(std::span<const double> x, int k) {
  if (k < 1 || k > static_cast<int>(x.size())) throw UsageError("transverse: axis out of range");
  Point out(x.size() - 1);
  transverse_into(x, k, out);
  return out;
}

/// phi : R^{d-1} -> R with analytic gradient and Hessian diagonal.
/// `orientation[j]` is the declared sign of d phi / d x_{j+2}.
class InterfaceSurface {
 public:
  using Scalar = std::function<double(std::span<const double>)>;
  using Vector = std::function<void(std::span<const double>, std::span<double>)>;

  InterfaceSurface(int dim, std::string name, Scalar phi, Vector grad, Vector hess_diag,
                   std::vector<int> orientation)
      : dim_(dim),
        name_(std::move(name)),
        phi_(std::move(phi)),
        grad_(std::move(grad)),
        hess_(std::move(hess_diag)),
        orientation_(std::move(orientation)) {
    if (dim_ < 1) throw UsageError("InterfaceSurface: dimension must be >= 1");
    if (static_cast<int>(orientation_.size()) != dim_ - 1) {
      throw UsageError("InterfaceSurface: orientation needs one sign per transverse axis");
    }
  }

  int dim() const noexcept { return dim_; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<int>& orientation() const noexcept { return orientation_; }

  double phi(std::span<const double> xhat) const { return phi_(xhat); }

  Point grad(std::span<const double> xhat) const {
    Point g(xhat.size(), 0.0);
    if (!g.empty()) grad_(xhat, g);
    return g;
  }

  Point hess_diag(std::span<const double> xhat) const {
    Point h(xhat.size(), 0.0);
    if (!h.empty()) hess_(xhat, h);
    return h;
  }

 private:
  int dim_;
  std::string name_;
  Scalar phi_;
  Vector grad_;
  Vector hess_;
  std::vector<int> orientation_;
};

/// phi = c. For d = 1 this is the point interface x_1 = c.
inline InterfaceSurface constant_surface(int dim, double c) {
  return InterfaceSurface(
      dim, "constant", [c](std::span<const double>) { return c; },
      [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); },
      [](std::span<const double>, std::span<double> h) { std::fill(h.begin(), h.end(), 0.0); },
      std::vector<int>(static_cast<std::size_t>(std::max(dim - 1, 0)), -1));
}

/// phi(x_hat) = slopes . x_hat + offset. Orientation is read off the slope signs.
inline InterfaceSurface affine_surface(std::vector<double> slopes, double offset) {
  const int dim = static_cast<int>(slopes.size()) + 1;
  std::vector<int> orientation;
  for (double c : slopes) orientation.push_back(c > 0.0 ? 1 : -1);
  auto phi = [slopes, offset](std::span<const double> xh) {
    double s = offset;
    for (std::size_t i = 0; i < slopes.size(); ++i) s += slopes[i] * xh[i];
    return s;
  };
  auto grad = [slopes](std::span<const double>, std::span<double> g) {
    std::copy(slopes.begin(), slopes.end(), g.begin());
  };
  auto hess = [](std::span<const double>, std::span<double> h) {
    std::fill(h.begin(), h.end(), 0.0);
  };
  return InterfaceSurface(dim, "affine", phi, grad, hess, std::move(orientation));
}

/// phi(x_hat) = offset + sum_j amplitude_j * atan(x_j / scale). Strictly monotone
/// in every coordinate with the sign of amplitude_j.
inline InterfaceSurface arctan_surface(std::vector<double> amplitude, double scale, double offset) {
  if (!(scale > 0.0)) throw UsageError("arctan_surface: scale must be > 0");
  const int dim = static_cast<int>(amplitude.size()) + 1;
  std::vector<int> orientation;
  for (double a : amplitude) orientation.push_back(a > 0.0 ? 1 : -1);
  auto phi = [amplitude, scale, offset](std::span<const double> xh) {
    double s = offset;
    for (std::size_t i = 0; i < amplitude.size(); ++i) s += amplitude[i] * std::atan(xh[i] / scale);
    return s;
  };
  auto grad = [amplitude, scale](std::span<const double> xh, std::span<double> g) {
    for (std::size_t i = 0; i < amplitude.size(); ++i) {
      const double r = xh[i] / scale;
      g[i] = amplitude[i] / (scale * (1.0 + r * r));
    }
  };
  auto hess = [amplitude, scale](std::span<const double> xh, std::span<double> h) {
    for (std::size_t i = 0; i < amplitude.size(); ++i) {
      const double r = xh[i] / scale;
      const double q = 1.0 + r * r;
      h[i] = -2.0 * amplitude[i] * r / (scale * scale * q * q);
    }
  };
  return InterfaceSurface(dim, "arctan", phi, grad, hess, std::move(orientation));
}

/// s(x) = x_1 - phi(x_hat_1); zero exactly on D.
inline double signed_offset(std::span<const double> x, const InterfaceSurface& surf) {
  if (static_cast<int>(x.size()) != surf.dim()) {
    throw UsageError("signed_offset: point has dimension " + std::to_string(x.size()) +
                     ", surface has " + std::to_string(surf.dim()));
  }
  return x[0] - surf.phi(x.subspan(1));
}

/// x in A_eta, i.e. |s(x)| < eta.
inline bool band_indicator(std::span<const double> x, double eta, const InterfaceSurface& surf) {
  return std::abs(signed_offset(x, surf)) < eta;
}

struct AxisMonotonicity {
  int axis = 2;  ///< 1-based coordinate index, >= 2
  int declared_sign = -1;
  double min_derivative = 0.0;
  double max_derivative = 0.0;
  double min_abs_derivative = 0.0;
  bool pass = false;
};

struct MonotonicityReport {
  std::vector<AxisMonotonicity> axes;
  std::size_t samples = 0;
  bool pass() const {
    return std::all_of(axes.begin(), axes.end(), [](const AxisMonotonicity& a) { return a.pass; });
  }
};

/// Deterministic tensor lattice over Q^{d-1}(K) in the transverse variables.
inline std::vector<Point> transverse_lattice(const Box& box, int per_axis = 33) {
  const int m = box.dim - 1;
  std::vector<Point> pts;
  if (m == 0) {
    pts.emplace_back();
    return pts;
  }
  if (per_axis < 2) throw UsageError("transverse_lattice: need >= 2 points per axis");
  std::size_t total = 1;
  for (int j = 0; j < m; ++j) total *= static_cast<std::size_t>(per_axis);
  pts.reserve(total);
  const double step = 2.0 * box.K / (per_axis - 1);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Point p(static_cast<std::size_t>(m));
    std::size_t rem = flat;
    for (int j = m - 1; j >= 0; --j) {
      p[static_cast<std::size_t>(j)] = -box.K + step * static_cast<double>(rem % per_axis);
      rem /= static_cast<std::size_t>(per_axis);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

/// Checks that d phi / d x_k keeps the declared sign at every sample, k = 2..d.
/// With no transverse coordinates the check passes vacuously.
inline MonotonicityReport validate_monotonicity(const InterfaceSurface& surf,
                                                std::span<const Point> samples) {
  if (samples.empty()) throw UsageError("validate_monotonicity: empty sample set");
  MonotonicityReport rep;
  rep.samples = samples.size();
  const int m = surf.dim() - 1;
  for (int j = 0; j < m; ++j) {
    AxisMonotonicity a;
    a.axis = j + 2;
    a.declared_sign = surf.orientation()[static_cast<std::size_t>(j)];
    a.min_derivative = std::numeric_limits<double>::infinity();
    a.max_derivative = -std::numeric_limits<double>::infinity();
    a.min_abs_derivative = std::numeric_limits<double>::infinity();
    rep.axes.push_back(a);
  }
  for (const Point& xh : samples) {
    if (static_cast<int>(xh.size()) != m) throw UsageError("validate_monotonicity: sample dimension");
    const Point g = surf.grad(xh);
    for (int j = 0; j < m; ++j) {
      auto& a = rep.axes[static_cast<std::size_t>(j)];
      const double v = g[static_cast<std::size_t>(j)];
      a.min_derivative = std::min(a.min_derivative, v);
      a.max_derivative = std::max(a.max_derivative, v);
      a.min_abs_derivative = std::min(a.min_abs_derivative, std::abs(v));
    }
  }
  for (auto& a : rep.axes) {
    a.pass = a.declared_sign < 0 ? a.max_derivative < 0.0 : a.min_derivative > 0.0;
  }
  return rep;
}

}  // namespace vvflux
