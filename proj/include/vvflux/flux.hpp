#pragma once

// Left/right flux pairs f_L^k, f_R^k, the mollified combined flux, the
// hypothesis validators and the Riemann-to-zero-data reduction.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vvflux/errors.hpp"
#include "vvflux/geometry.hpp"
#include "vvflux/mollifier.hpp"

namespace vvflux {

/// f_L, f_R and their lambda-derivatives at one (x_hat, lambda).
struct FluxSample {
  double left = 0.0;
  double right = 0.0;
  double dleft = 0.0;
  double dright = 0.0;
};

using FluxFn = std::function<double(std::span<const double>, double)>;
using EnvelopeFn = std::function<double(std::span<const double>)>;
using SampleFn = std::function<FluxSample(std::span<const double>, double)>;

/// One spatial direction k of a flux pair. Functions take x_hat_k (length d-1).
struct FluxComponent {
  FluxFn left;
  FluxFn right;
  FluxFn dleft;   ///< optional analytic d/dlambda
  FluxFn dright;  ///< optional analytic d/dlambda
  EnvelopeFn sup_left, inf_left, sup_right, inf_right;  ///< optional, over lambda in R
  SampleFn fused;  ///< optional single-call evaluation of all four values
  double bound = std::numeric_limits<double>::infinity();  ///< declared sup |f|

  bool has_analytic_derivative() const { return static_cast<bool>(dleft) && static_cast<bool>(dright); }
  bool has_envelopes() const {
    return sup_left && inf_left && sup_right && inf_right;
  }
};

inline double fd_step(double u) { return 1e-6 * std::max(1.0, std::abs(u)); }

class FluxPair {
 public:
  FluxPair(int dim, std::string name, std::vector<FluxComponent> components)
      : dim_(dim), name_(std::move(name)), comps_(std::move(components)) {
    if (dim_ < 1) throw UsageError("FluxPair: dimension must be >= 1");
    if (static_cast<int>(comps_.size()) != dim_) throw UsageError("FluxPair: need one component per axis");
    for (const auto& c : comps_) {
      if (!c.left || !c.right) throw UsageError("FluxPair: left and right flux are required");
    }
  }

  int dim() const noexcept { return dim_; }
  const std::string& name() const noexcept { return name_; }

  /// Component for axis k, 1-based.
  const FluxComponent& component(int k) const {
    if (k < 1 || k > dim_) throw UsageError("FluxPair: axis " + std::to_string(k) + " out of range");
    return comps_[static_cast<std::size_t>(k - 1)];
  }

  FluxSample sample(int k, std::span<const double> xhat, double u) const {
    const FluxComponent& c = component(k);
    if (c.fused) return c.fused(xhat, u);
    FluxSample s;
    s.left = c.left(xhat, u);
    s.right = c.right(xhat, u);
    if (c.has_analytic_derivative()) {
      s.dleft = c.dleft(xhat, u);
      s.dright = c.dright(xhat, u);
    } else {
      const double h = fd_step(u);
      s.dleft = (c.left(xhat, u + h) - c.left(xhat, u - h)) / (2.0 * h);
      s.dright = (c.right(xhat, u + h) - c.right(xhat, u - h)) / (2.0 * h);
    }
    return s;
  }

  /// (f_L^k(x_hat, 0), f_R^k(x_hat, 0))
  std::pair<double, double> zero_trace(int k, std::span<const double> xhat) const {
    const FluxComponent& c = component(k);
    return {c.left(xhat, 0.0), c.right(xhat, 0.0)};
  }

 private:
  int dim_;
  std::string name_;
  std::vector<FluxComponent> comps_;
};

/// f_L^k(x_hat_k, u) H_eps(-s) + f_R^k(x_hat_k, u) H_eps(s), s = x_1 - phi(x_hat_1).
inline double combined_flux(int k, std::span<const double> x, double u, const FluxPair& fp,
                            const InterfaceSurface& surf, const MollifierFamily& fam) {
  const double s = signed_offset(x, surf);
  const Point xh = transverse(x, k);
  const FluxComponent& c = fp.component(k);
  return c.left(xh, u) * heaviside_eps(-s, fam) + c.right(xh, u) * heaviside_eps(s, fam);
}

/// d/du of combined_flux: analytic when the component carries derivatives,
/// otherwise a central difference with step 1e-6 * max(1, |u|).
inline double flux_u_derivative(int k, std::span<const double> x, double u, const FluxPair& fp,
                                const InterfaceSurface& surf, const MollifierFamily& fam) {
  const FluxComponent& c = fp.component(k);
  if (c.has_analytic_derivative()) {
    const double s = signed_offset(x, surf);
    const Point xh = transverse(x, k);
    return c.dleft(xh, u) * heaviside_eps(-s, fam) + c.dright(xh, u) * heaviside_eps(s, fam);
  }
  const double h = fd_step(u);
  return (combined_flux(k, x, u + h, fp, surf, fam) - combined_flux(k, x, u - h, fp, surf, fam)) /
         (2.0 * h);
}

// ---------------------------------------------------------------------------
// Transverse quadrature

namespace detail {

/// Tensor trapezoid rule of g over [-K, K]^{m}; for m = 0 returns g(empty).
template <class Fn>
double transverse_trapezoid(int m, double K, int points, Fn&& g) {
  if (m == 0) return g(std::span<const double>{});
  if (points < 2) throw UsageError("transverse quadrature needs >= 2 points per axis");
  const double h = 2.0 * K / (points - 1);
  std::size_t total = 1;
  for (int j = 0; j < m; ++j) total *= static_cast<std::size_t>(points);
  std::vector<double> xh(static_cast<std::size_t>(m));
  double acc = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double w = 1.0;
    for (int j = m - 1; j >= 0; --j) {
      const auto i = static_cast<int>(rem % static_cast<std::size_t>(points));
      rem /= static_cast<std::size_t>(points);
      xh[static_cast<std::size_t>(j)] = -K + h * i;
      w *= (i == 0 || i == points - 1) ? 0.5 * h : h;
    }
    acc += w * g(std::span<const double>(xh));
  }
  return acc;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Non-alignment validation

/// Which inequality an axis is checked against.
enum class MarginForm {
  max_left_minus_min_right,  ///< integral of (max f_L - min f_R) <= -tol
  min_left_minus_max_right,  ///< integral of (min f_L - max f_R) >= +tol (increasing phi)
};

struct MarginOptions {
  double lambda_max = 1000.0;    ///< sampled lambda range [-Lambda, Lambda]
  int lambda_points = 2001;
  int transverse_points = 201;   ///< per transverse axis
  double tolerance = 1e-6;
};

struct MarginEntry {
  int axis = 1;
  MarginForm form = MarginForm::max_left_minus_min_right;
  double sampled_margin = 0.0;
  std::optional<double> analytic_margin;
  bool ordering_at_zero = false;  ///< f_L(.,0) <= f_R(.,0) (reversed for the opposite form)
  double worst_zero_gap = 0.0;    ///< most adverse f_L(.,0) - f_R(.,0) (sign per form)
  bool pass = false;
};

struct NonAlignmentReport {
  std::vector<MarginEntry> entries;
  MarginOptions options;
  bool mixed_orientation = false;  ///< transverse orientations disagree: outside the model hypotheses
  bool bounded = true;
  std::vector<double> transverse_sup_integrals;  ///< per axis, integral of sup_z |f^k(., z)|
  bool pass() const {
    return bounded && std::all_of(entries.begin(), entries.end(),
                                  [](const MarginEntry& e) { return e.pass && e.ordering_at_zero; });
  }
};

inline MarginForm margin_form(int k, const InterfaceSurface& surf) {
  if (k >= 2 && surf.orientation()[static_cast<std::size_t>(k - 2)] > 0) {
    return MarginForm::min_left_minus_max_right;
  }
  return MarginForm::max_left_minus_min_right;
}

namespace detail {

inline std::vector<double> lambda_grid(const MarginOptions& opt) {
  if (opt.lambda_points < 1) throw UsageError("nonalignment_margin: empty lambda grid");
  if (!(opt.lambda_max > 0.0)) throw UsageError("nonalignment_margin: lambda_max must be > 0");
  std::vector<double> g(static_cast<std::size_t>(opt.lambda_points));
  if (opt.lambda_points == 1) {
    g[0] = 0.0;
    return g;
  }
  const double step = 2.0 * opt.lambda_max / (opt.lambda_points - 1);
  for (int i = 0; i < opt.lambda_points; ++i) g[static_cast<std::size_t>(i)] = -opt.lambda_max + step * i;
  g.back() = opt.lambda_max;
  return g;
}

}  // namespace detail

/// Evaluates the non-alignment integral for axis k (1-based) over the
/// transverse box by lambda grid search and tensor trapezoid quadrature.
inline MarginEntry nonalignment_margin(int k, const FluxPair& fp, const InterfaceSurface& surf,
                                       const Box& box, const MarginOptions& opt = {}) {
  const std::vector<double> lam = detail::lambda_grid(opt);
  const FluxComponent& c = fp.component(k);
  MarginEntry e;
  e.axis = k;
  e.form = margin_form(k, surf);
  const bool standard = e.form == MarginForm::max_left_minus_min_right;
  const int m = fp.dim() - 1;

  e.sampled_margin = detail::transverse_trapezoid(m, box.K, opt.transverse_points, [&](std::span<const double> xh) {
    double lmax = -std::numeric_limits<double>::infinity(), lmin = std::numeric_limits<double>::infinity();
    double rmax = lmax, rmin = lmin;
    for (double l : lam) {
      const double fl = c.left(xh, l);
      const double fr = c.right(xh, l);
      lmax = std::max(lmax, fl);
      lmin = std::min(lmin, fl);
      rmax = std::max(rmax, fr);
      rmin = std::min(rmin, fr);
    }
    return standard ? lmax - rmin : lmin - rmax;
  });

  if (c.has_envelopes()) {
    e.analytic_margin = detail::transverse_trapezoid(m, box.K, opt.transverse_points, [&](std::span<const double> xh) {
      return standard ? c.sup_left(xh) - c.inf_right(xh) : c.inf_left(xh) - c.sup_right(xh);
    });
  }
  const double decisive = e.analytic_margin.value_or(e.sampled_margin);
  e.pass = standard ? decisive <= -opt.tolerance : decisive >= opt.tolerance;

  // Ordering at zero on the quadrature lattice.
  const std::vector<Point> lattice = transverse_lattice(Box(box.K, fp.dim()), std::min(opt.transverse_points, 65));
  double worst = -std::numeric_limits<double>::infinity();
  for (const Point& xh : lattice) {
    const auto [l0, r0] = fp.zero_trace(k, xh);
    worst = std::max(worst, standard ? l0 - r0 : r0 - l0);
  }
  e.worst_zero_gap = worst;
  e.ordering_at_zero = worst <= 0.0;
  return e;
}

/// Runs every per-axis check plus boundedness and transverse integrability.
inline NonAlignmentReport validate_nonalignment(const FluxPair& fp, const InterfaceSurface& surf,
                                                const Box& box, const MarginOptions& opt = {}) {
  if (fp.dim() != surf.dim()) throw UsageError("validate_nonalignment: flux and surface dimensions differ");
  NonAlignmentReport rep;
  rep.options = opt;
  const auto& ori = surf.orientation();
  rep.mixed_orientation = !ori.empty() && std::any_of(ori.begin(), ori.end(), [&](int s) { return s != ori[0]; });
  const std::vector<double> lam = detail::lambda_grid(opt);
  for (int k = 1; k <= fp.dim(); ++k) {
    rep.entries.push_back(nonalignment_margin(k, fp, surf, box, opt));
    const FluxComponent& c = fp.component(k);
    // Boundedness on a coarse lattice, and integral of sup_z |f^k(., z)|.
    const int coarse = std::min(opt.transverse_points, 33);
    for (const Point& xh : transverse_lattice(Box(box.K, fp.dim()), coarse)) {
      for (double l : lam) {
        const double slack = 1e-12 * std::max(1.0, c.bound);
        if (std::abs(c.left(xh, l)) > c.bound + slack || std::abs(c.right(xh, l)) > c.bound + slack) {
          rep.bounded = false;
        }
      }
    }
    rep.transverse_sup_integrals.push_back(
        detail::transverse_trapezoid(fp.dim() - 1, box.K, coarse, [&](std::span<const double> xh) {
          double sup = 0.0;
          for (double l : lam) sup = std::max({sup, std::abs(c.left(xh, l)), std::abs(c.right(xh, l))});
          return sup;
        }));
  }
  return rep;
}

/// G = sum_k integral |f_L^k(x_hat, 0) - f_R^k(x_hat, 0)| d x_hat over the
/// truncated transverse box; the L^1 growth rate per unit time.
inline double zero_trace_gap(const FluxPair& fp, const Box& box, int points_per_axis = 401) {
  double total = 0.0;
  for (int k = 1; k <= fp.dim(); ++k) {
    total += detail::transverse_trapezoid(fp.dim() - 1, box.K, points_per_axis, [&](std::span<const double> xh) {
      const auto [l0, r0] = fp.zero_trace(k, xh);
      return std::abs(l0 - r0);
    });
  }
  return total;
}

/// g_L(x_hat, lambda) = f_L(x_hat, lambda + u_left), g_R likewise with u_right.
/// The zero-data problem for g is the Riemann problem for f. Envelopes over
/// lambda in R are shift invariant and carried over unchanged.
inline FluxPair riemann_reduce(const FluxPair& fp, double u_left, double u_right) {
  if (u_left == 0.0 && u_right == 0.0) return fp;
  std::vector<FluxComponent> out;
  for (int k = 1; k <= fp.dim(); ++k) {
    const FluxComponent c = fp.component(k);
    FluxComponent g = c;
    g.left = [f = c.left, u_left](std::span<const double> xh, double l) { return f(xh, l + u_left); };
    g.right = [f = c.right, u_right](std::span<const double> xh, double l) { return f(xh, l + u_right); };
    if (c.has_analytic_derivative()) {
      g.dleft = [f = c.dleft, u_left](std::span<const double> xh, double l) { return f(xh, l + u_left); };
      g.dright = [f = c.dright, u_right](std::span<const double> xh, double l) { return f(xh, l + u_right); };
    }
    if (c.fused) {
      g.fused = [f = c.fused, u_left, u_right](std::span<const double> xh, double l) {
        FluxSample a = f(xh, l + u_left);
        if (u_left == u_right) return a;
        const FluxSample b = f(xh, l + u_right);
        a.right = b.right;
        a.dright = b.dright;
        return a;
      };
    }
    out.push_back(std::move(g));
  }
  return FluxPair(fp.dim(), fp.name() + "+riemann", std::move(out));
}

// ---------------------------------------------------------------------------
// Built-in fixtures

namespace detail {

inline double gauss_weight(std::span<const double> xh) {
  double r2 = 0.0;
  for (double v : xh) r2 += v * v;
  return std::exp(-r2);
}

}  // namespace detail

/// k-th component e^{-|x_hat|^2} (atan(lambda) -/+ sign * gap / 2). With
/// sign = +1, f_L sits below f_R; sign = -1 swaps them (used on axes where phi
/// increases, which are checked against the opposite inequality).
inline FluxComponent gauss_arctan_component(double gap, double sign) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  const double shift = 0.5 * gap * sign;
  FluxComponent c;
  c.left = [shift](std::span<const double> xh, double l) { return detail::gauss_weight(xh) * (std::atan(l) - shift); };
  c.right = [shift](std::span<const double> xh, double l) { return detail::gauss_weight(xh) * (std::atan(l) + shift); };
  c.dleft = [](std::span<const double> xh, double l) { return detail::gauss_weight(xh) / (1.0 + l * l); };
  c.dright = c.dleft;
  c.sup_left = [shift](std::span<const double> xh) { return detail::gauss_weight(xh) * (half_pi - shift); };
  c.inf_left = [shift](std::span<const double> xh) { return detail::gauss_weight(xh) * (-half_pi - shift); };
  c.sup_right = [shift](std::span<const double> xh) { return detail::gauss_weight(xh) * (half_pi + shift); };
  c.inf_right = [shift](std::span<const double> xh) { return detail::gauss_weight(xh) * (-half_pi + shift); };
  c.fused = [shift](std::span<const double> xh, double l) {
    const double w = detail::gauss_weight(xh);
    const double a = std::atan(l);
    const double d = w / (1.0 + l * l);
    return FluxSample{w * (a - shift), w * (a + shift), d, d};
  };
  c.bound = half_pi + std::abs(shift);
  return c;
}

/// d = 1: f_L = atan(lambda) - gap/2, f_R = atan(lambda) + gap/2.
inline FluxPair arctan_gap(double gap = 4.0) {
  return FluxPair(1, "arctan_gap", {gauss_arctan_component(gap, 1.0)});
}

/// d >= 2: every component e^{-|x_hat_k|^2}(atan(lambda) -/+ gap/2). For
/// orientation +1 the transverse components swap sides.
inline FluxPair gauss_arctan(int dim, double gap = 4.0, int orientation = -1) {
  if (dim < 1) throw UsageError("gauss_arctan: dimension must be >= 1");
  std::vector<FluxComponent> comps;
  for (int k = 1; k <= dim; ++k) {
    const double sign = (k >= 2 && orientation > 0) ? -1.0 : 1.0;
    comps.push_back(gauss_arctan_component(gap, sign));
  }
  return FluxPair(dim, "gauss_arctan", std::move(comps));
}

/// Lambda-independent pair f_L = -gap/2 w, f_R = +gap/2 w, w = e^{-|x_hat|^2}.
inline FluxPair constant_gap(int dim, double gap) {
  std::vector<FluxComponent> comps;
  for (int k = 1; k <= dim; ++k) {
    FluxComponent c;
    const double half = 0.5 * gap;
    c.left = [half](std::span<const double> xh, double) { return -half * detail::gauss_weight(xh); };
    c.right = [half](std::span<const double> xh, double) { return half * detail::gauss_weight(xh); };
    c.dleft = [](std::span<const double>, double) { return 0.0; };
    c.dright = c.dleft;
    c.sup_left = [half](std::span<const double> xh) { return -half * detail::gauss_weight(xh); };
    c.inf_left = c.sup_left;
    c.sup_right = [half](std::span<const double> xh) { return half * detail::gauss_weight(xh); };
    c.inf_right = c.sup_right;
    c.bound = std::abs(half);
    comps.push_back(std::move(c));
  }
  return FluxPair(dim, "constant_gap", std::move(comps));
}

/// f_L^k = f_R^k = velocity[k] * lambda. Unbounded; for solver verification only.
inline FluxPair linear_flux(std::vector<double> velocity) {
  const int dim = static_cast<int>(velocity.size());
  std::vector<FluxComponent> comps;
  for (double v : velocity) {
    FluxComponent c;
    c.left = [v](std::span<const double>, double l) { return v * l; };
    c.right = c.left;
    c.dleft = [v](std::span<const double>, double) { return v; };
    c.dright = c.dleft;
    c.fused = [v](std::span<const double>, double l) { return FluxSample{v * l, v * l, v, v}; };
    comps.push_back(std::move(c));
  }
  return FluxPair(dim, "linear", std::move(comps));
}

struct FixtureParams {
  double gap = 4.0;
  int orientation = -1;
};

/// Registry of named fixtures: "arctan_gap" (d = 1) and "gauss_arctan" (d >= 2).
inline FluxPair make_fixture(const std::string& name, int dim, const FixtureParams& p = {}) {
  if (name == "arctan_gap") {
    if (dim != 1) throw UsageError("fixture arctan_gap is one-dimensional");
    return arctan_gap(p.gap);
  }
  if (name == "gauss_arctan") {
    if (dim < 2) throw UsageError("fixture gauss_arctan needs dim >= 2");
    return gauss_arctan(dim, p.gap, p.orientation);
  }
  throw UsageError("unknown fixture '" + name + "'");
}

}  // namespace vvflux
