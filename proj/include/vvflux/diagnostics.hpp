#pragma once

// Functionals evaluated on solver snapshots: L^1 norm, positive excursion,
// weighted interface mass, band masses and the mass-balance ledger.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vvflux/errors.hpp"
#include "vvflux/geometry.hpp"
#include "vvflux/grid.hpp"
#include "vvflux/mollifier.hpp"
#include "vvflux/solver.hpp"

namespace vvflux {

inline double l1_norm(const Field& u) {
  detail::CompensatedSum s;
  for (double v : u.values) s.add(std::abs(v));
  return s.value() * u.grid.cell_volume();
}

inline double total_mass(const Field& u) {
  detail::CompensatedSum s;
  for (double v : u.values) s.add(v);
  return s.value() * u.grid.cell_volume();
}

inline double max_value(const Field& u) { return *std::max_element(u.values.begin(), u.values.end()); }

/// max(0, max u): the worst violation of u <= 0.
inline double positivity_violation(const Field& u) { return std::max(0.0, max_value(u)); }

/// exp(-| s / a(eps) |_{sigma(eps)}) with s the signed offset of x.
inline double concentration_weight(std::span<const double> x, double eps, const WeightSchedule& sched,
                                   const InterfaceSurface& surf) {
  const double s = signed_offset(x, surf);
  return std::exp(-reg_abs(s / sched.a(eps), sched.sigma(eps)));
}

/// Signed offset of every cell centre.
inline std::vector<double> cell_offsets(const Grid& g, const InterfaceSurface& surf) {
  std::vector<double> s(g.cells());
  Point x(static_cast<std::size_t>(g.dim()));
  for (std::size_t c = 0; c < g.cells(); ++c) {
    g.center_point(c, x);
    s[c] = signed_offset(x, surf);
  }
  return s;
}

inline std::vector<double> concentration_weights(const Grid& g, double eps, const WeightSchedule& sched,
                                                 const InterfaceSurface& surf) {
  std::vector<double> w(g.cells());
  Point x(static_cast<std::size_t>(g.dim()));
  for (std::size_t c = 0; c < g.cells(); ++c) {
    g.center_point(c, x);
    w[c] = concentration_weight(x, eps, sched, surf);
  }
  return w;
}

/// W = sum u * weight * h^d.
inline double weighted_mass(const Field& u, std::span<const double> weights) {
  if (weights.size() != u.values.size()) throw UsageError("weighted_mass: weight count mismatch");
  detail::CompensatedSum s;
  for (std::size_t c = 0; c < weights.size(); ++c) s.add(u.values[c] * weights[c]);
  return s.value() * u.grid.cell_volume();
}

/// Signed mass inside A_eta = { |s| < eta }, with precomputed cell offsets.
inline double band_mass(const Field& u, double eta, std::span<const double> offsets) {
  if (!(eta > 0.0)) throw UsageError("band_mass: eta must be > 0");
  detail::CompensatedSum s;
  for (std::size_t c = 0; c < offsets.size(); ++c) {
    if (std::abs(offsets[c]) < eta) s.add(u.values[c]);
  }
  return s.value() * u.grid.cell_volume();
}

inline double band_mass(const Field& u, double eta, const InterfaceSurface& surf) {
  return band_mass(u, eta, cell_offsets(u.grid, surf));
}

/// Running trapezoid integral, starting from 0 at times[0].
inline std::vector<double> cumulative_trapezoid(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw UsageError("cumulative_trapezoid: length mismatch");
  std::vector<double> out(times.size(), 0.0);
  for (std::size_t j = 1; j < times.size(); ++j) {
    out[j] = out[j - 1] + 0.5 * (times[j] - times[j - 1]) * (values[j] + values[j - 1]);
  }
  return out;
}

/// Piecewise-linear interpolation of samples at t (clamped to the ends).
inline double interpolate(std::span<const double> times, std::span<const double> values, double t) {
  if (times.empty()) throw UsageError("interpolate: no samples");
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto j = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
  return (1.0 - w) * values[j - 1] + w * values[j];
}

struct ConcentrationSeries {
  std::vector<double> times;
  std::vector<double> W;  ///< weighted mass at each sample
  std::vector<double> I;  ///< cumulative time integral of W
};

inline ConcentrationSeries concentration_series(std::span<const Field> trajectory, double eps,
                                                const WeightSchedule& sched, const InterfaceSurface& surf) {
  ConcentrationSeries cs;
  if (trajectory.empty()) return cs;
  const std::vector<double> w = concentration_weights(trajectory.front().grid, eps, sched, surf);
  for (const Field& f : trajectory) {
    cs.times.push_back(f.t);
    cs.W.push_back(weighted_mass(f, w));
  }
  cs.I = cumulative_trapezoid(cs.times, cs.W);
  return cs;
}

struct QuadraticFit {
  double beta = 0.0;
  double r_squared = 0.0;
  bool r_squared_defined = false;
  std::size_t samples = 0;
};

/// Least-squares fit I(t) ~ -beta t^2 over samples with t >= t0.
inline QuadraticFit fit_quadratic_decay(std::span<const double> times, std::span<const double> I, double t0) {
  if (times.size() != I.size()) throw UsageError("fit_quadratic_decay: length mismatch");
  if (!(t0 > 0.0)) throw UsageError("fit_quadratic_decay: window start must be > 0");
  QuadraticFit fit;
  double num = 0.0, den = 0.0, mean = 0.0;
  std::vector<std::size_t> sel;
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (times[j] >= t0 - 1e-12 * std::abs(t0)) sel.push_back(j);
  }
  fit.samples = sel.size();
  if (sel.size() < 5) throw UsageError("fit_quadratic_decay: need at least 5 samples in the window");
  for (std::size_t j : sel) {
    const double t2 = times[j] * times[j];
    num += I[j] * t2;
    den += t2 * t2;
    mean += I[j];
  }
  mean /= static_cast<double>(sel.size());
  fit.beta = -num / den;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t j : sel) {
    const double model = -fit.beta * times[j] * times[j];
    ss_res += (I[j] - model) * (I[j] - model);
    ss_tot += (I[j] - mean) * (I[j] - mean);
  }
  if (ss_tot > 0.0) {
    fit.r_squared = 1.0 - ss_res / ss_tot;
    fit.r_squared_defined = true;
  } else if (num == 0.0) {
    fit.beta = 0.0;
  }
  return fit;
}

/// max over steps of |delta_mass - boundary_inflow| / max(|delta_mass|, |boundary_inflow|, 1e-300).
inline double ledger_check(std::span<const LedgerEntry> ledger) {
  if (ledger.empty()) throw UsageError("ledger_check: empty ledger");
  double worst = 0.0;
  for (const LedgerEntry& e : ledger) {
    const double scale = std::max({std::abs(e.delta_mass), std::abs(e.boundary_inflow), 1e-300});
    worst = std::max(worst, std::abs(e.delta_mass - e.boundary_inflow) / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Time series recorded at probe times

struct DiagnosticsSeries {
  std::vector<double> etas;
  std::vector<double> times;
  std::vector<double> l1, mass, max_u, W, I;
  std::vector<std::vector<double>> band;  ///< band[i][j]: mass in A_{etas[i]} at times[j]
  std::optional<double> ledger_max_rel;
};

/// Probe callback that samples every diagnostic at each probe time.
class DiagnosticsRecorder {
 public:
  DiagnosticsRecorder(const Grid& g, const InterfaceSurface& surf, double eps, const WeightSchedule& sched,
                      std::vector<double> etas)
      : weights_(concentration_weights(g, eps, sched, surf)), offsets_(cell_offsets(g, surf)) {
    if (!std::is_sorted(etas.begin(), etas.end())) throw UsageError("DiagnosticsRecorder: etas must ascend");
    series_.etas = std::move(etas);
    series_.band.resize(series_.etas.size());
  }

  void operator()(const Field& u) {
    series_.times.push_back(u.t);
    series_.l1.push_back(l1_norm(u));
    series_.mass.push_back(total_mass(u));
    series_.max_u.push_back(max_value(u));
    series_.W.push_back(weighted_mass(u, weights_));
    for (std::size_t i = 0; i < series_.etas.size(); ++i) {
      series_.band[i].push_back(band_mass(u, series_.etas[i], offsets_));
    }
  }

  DiagnosticsSeries finish(std::span<const LedgerEntry> ledger) {
    series_.I = cumulative_trapezoid(series_.times, series_.W);
    if (!ledger.empty()) series_.ledger_max_rel = ledger_check(ledger);
    return series_;
  }

 private:
  std::vector<double> weights_;
  std::vector<double> offsets_;
  DiagnosticsSeries series_;
};

/// Columns: t, l1, mass, max_u, W, I, band_mass_<eta>...; trailing
/// "# ledger_max_rel=<value>" comment when a ledger was checked.
inline void write_diagnostics_csv(std::ostream& os, const DiagnosticsSeries& s) {
  os << "t,l1,mass,max_u,W,I";
  for (double eta : s.etas) os << ",band_mass_" << detail::shortest(eta);
  os << '\n';
  for (std::size_t j = 0; j < s.times.size(); ++j) {
    os << detail::shortest(s.times[j]) << ',' << detail::shortest(s.l1[j]) << ',' << detail::shortest(s.mass[j])
       << ',' << detail::shortest(s.max_u[j]) << ',' << detail::shortest(s.W[j]) << ','
       << detail::shortest(s.I[j]);
    for (const auto& b : s.band) os << ',' << detail::shortest(b[j]);
    os << '\n';
  }
  if (s.ledger_max_rel) os << "# ledger_max_rel=" << detail::shortest(*s.ledger_max_rel) << '\n';
}

}  // namespace vvflux
