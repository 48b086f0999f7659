#pragma once

// Run configurations, epsilon sweeps and their reports.

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vvflux/diagnostics.hpp"
#include "vvflux/errors.hpp"
#include "vvflux/flux.hpp"
#include "vvflux/geometry.hpp"
#include "vvflux/grid.hpp"
#include "vvflux/mollifier.hpp"
#include "vvflux/solver.hpp"
#include "vvflux/version.hpp"

namespace vvflux {

/// Upper bound on cells per run when n is chosen automatically.
inline constexpr std::size_t kMaxAutoCells = 4'200'000;

struct InterfaceSpec {
  std::string kind;  ///< "constant", "affine" or "arctan"
  std::vector<double> slopes;     ///< affine slopes / arctan amplitudes, one per transverse axis
  double offset = 0.0;
  double scale = 1.0;             ///< arctan only
};

struct RunConfig {
  int dim = 1;
  double K = 5.0;
  std::optional<int> n;  ///< nullopt: automatic, h = eps / 5
  std::vector<double> eps;
  double T = 1.0;
  int probes = 41;
  std::string fixture;
  FixtureParams fixture_params;
  InterfaceSpec interface;
  std::vector<double> etas{0.1, 0.2};
  double schedule_p = 1.0 / 3.0;
  double u_left = 0.0;
  double u_right = 0.0;
  std::string out_dir = "vvflux_out";
  std::string source_text;  ///< the configuration as given, echoed in reports

  /// Cells per axis for the i-th epsilon.
  int cells_for(double e) const {
    if (n) return *n;
    int m = static_cast<int>(std::ceil(2.0 * K / (e / 5.0) - 1e-9));
    // Memory cap: shrink to the budget; parse_config then checks h <= eps / 4.
    while (m > 8 && std::pow(static_cast<double>(m), dim) > static_cast<double>(kMaxAutoCells)) --m;
    return std::max(m, 8);
  }
};

inline InterfaceSurface build_surface(const RunConfig& cfg) {
  const InterfaceSpec& s = cfg.interface;
  if (s.kind == "constant") return constant_surface(cfg.dim, s.offset);
  if (s.kind == "affine") return affine_surface(s.slopes, s.offset);
  if (s.kind == "arctan") return arctan_surface(s.slopes, s.scale, s.offset);
  throw ConfigError("fixture_params.interface", "unknown interface '" + s.kind + "'");
}

inline FluxPair build_flux(const RunConfig& cfg) {
  return make_fixture(cfg.fixture, cfg.dim, cfg.fixture_params);
}

namespace detail {

using nlohmann::json;

inline double number_at(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  return v;
}

inline int integer_at(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(key, "expected an integer");
  return j.get<int>();
}

inline std::vector<double> numbers_at(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number_at(v, key));
  return out;
}

inline std::string string_at(const json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError(key, "expected a string");
  return j.get<std::string>();
}

}  // namespace detail

/// Parses and validates the JSON key-value configuration. Unknown keys are rejected.
inline RunConfig parse_config(const std::string& text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("<document>", "expected a JSON object");

  static const std::set<std::string> known{"dim", "K", "n", "eps", "T", "probes", "fixture", "fixture_params",
                                           "etas", "schedule_p", "u_left", "u_right", "out_dir"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError(key, "unknown key");
  }
  for (const char* req : {"dim", "K", "eps", "T", "fixture"}) {
    if (!j.contains(req)) throw ConfigError(req, "missing required key");
  }

  RunConfig cfg;
  cfg.source_text = text;
  cfg.dim = detail::integer_at(j["dim"], "dim");
  if (cfg.dim < 1 || cfg.dim > 3) throw ConfigError("dim", "must be 1, 2 or 3");
  cfg.K = detail::number_at(j["K"], "K");
  if (!(cfg.K > 0.0)) throw ConfigError("K", "must be > 0");
  cfg.T = detail::number_at(j["T"], "T");
  if (!(cfg.T > 0.0)) throw ConfigError("T", "must be > 0");

  cfg.eps = detail::numbers_at(j["eps"], "eps");
  if (cfg.eps.empty()) throw ConfigError("eps", "eps list must not be empty");
  for (double e : cfg.eps) {
    if (!(e > 0.0)) throw ConfigError("eps", "eps values must be > 0");
  }
  for (std::size_t i = 1; i < cfg.eps.size(); ++i) {
    if (!(cfg.eps[i] < cfg.eps[i - 1])) throw ConfigError("eps", "eps list must be strictly decreasing");
  }

  if (j.contains("n")) {
    if (j["n"].is_string()) {
      if (j["n"].get<std::string>() != "auto") throw ConfigError("n", "expected an integer or \"auto\"");
    } else {
      cfg.n = detail::integer_at(j["n"], "n");
      if (*cfg.n < 8) throw ConfigError("n", "need at least 8 cells per axis");
    }
  }
  if (j.contains("probes")) {
    cfg.probes = detail::integer_at(j["probes"], "probes");
    if (cfg.probes < 20) throw ConfigError("probes", "need at least 20 probe times over [0, T]");
  }
  cfg.fixture = detail::string_at(j["fixture"], "fixture");

  cfg.interface.kind = cfg.dim == 1 ? "constant" : "affine";
  std::optional<std::vector<double>> slopes;
  if (j.contains("fixture_params")) {
    const json& fp = j["fixture_params"];
    if (!fp.is_object()) throw ConfigError("fixture_params", "expected an object");
    static const std::set<std::string> fkeys{"gap", "orientation", "interface", "slopes", "offset", "scale"};
    for (const auto& [key, val] : fp.items()) {
      const std::string full = "fixture_params." + key;
      if (!fkeys.count(key)) throw ConfigError(full, "unknown key");
      if (key == "gap") cfg.fixture_params.gap = detail::number_at(val, full);
      if (key == "orientation") {
        cfg.fixture_params.orientation = detail::integer_at(val, full);
        if (cfg.fixture_params.orientation != 1 && cfg.fixture_params.orientation != -1) {
          throw ConfigError(full, "must be +1 or -1");
        }
      }
      if (key == "interface") cfg.interface.kind = detail::string_at(val, full);
      if (key == "slopes") slopes = detail::numbers_at(val, full);
      if (key == "offset") cfg.interface.offset = detail::number_at(val, full);
      if (key == "scale") {
        cfg.interface.scale = detail::number_at(val, full);
        if (!(cfg.interface.scale > 0.0)) throw ConfigError(full, "must be > 0");
      }
    }
  }
  const auto transverse = static_cast<std::size_t>(cfg.dim - 1);
  cfg.interface.slopes = slopes.value_or(std::vector<double>(transverse, double(cfg.fixture_params.orientation)));
  if (cfg.interface.slopes.size() != transverse) {
    throw ConfigError("fixture_params.slopes", "need one slope per transverse axis (" + std::to_string(transverse) + ")");
  }
  if (cfg.interface.kind != "constant" && cfg.interface.kind != "affine" && cfg.interface.kind != "arctan") {
    throw ConfigError("fixture_params.interface", "unknown interface '" + cfg.interface.kind + "'");
  }
  if (cfg.dim >= 2 && cfg.interface.kind == "constant") {
    throw ConfigError("fixture_params.interface", "a constant interface is not strictly monotone for dim >= 2");
  }
  try {
    (void)build_flux(cfg);
  } catch (const UsageError& e) {
    throw ConfigError("fixture", e.what());
  }

  if (j.contains("etas")) {
    cfg.etas = detail::numbers_at(j["etas"], "etas");
    if (cfg.etas.empty()) throw ConfigError("etas", "must not be empty");
    for (std::size_t i = 0; i < cfg.etas.size(); ++i) {
      if (!(cfg.etas[i] > 0.0)) throw ConfigError("etas", "values must be > 0");
      if (i > 0 && !(cfg.etas[i] > cfg.etas[i - 1])) throw ConfigError("etas", "values must be strictly ascending");
    }
  }
  if (j.contains("schedule_p")) {
    cfg.schedule_p = detail::number_at(j["schedule_p"], "schedule_p");
    if (!(cfg.schedule_p > 0.0 && cfg.schedule_p < 0.5)) throw ConfigError("schedule_p", "must lie in (0, 0.5)");
  }
  if (j.contains("u_left")) cfg.u_left = detail::number_at(j["u_left"], "u_left");
  if (j.contains("u_right")) cfg.u_right = detail::number_at(j["u_right"], "u_right");
  if (j.contains("out_dir")) cfg.out_dir = detail::string_at(j["out_dir"], "out_dir");

  for (double e : cfg.eps) {
    const int m = cfg.cells_for(e);
    const double h = 2.0 * cfg.K / m;
    if (h > e / 4.0) {
      std::ostringstream msg;
      msg << "resolution h=" << h << " exceeds eps/4=" << e / 4.0 << " for eps=" << e
          << (cfg.n ? "" : " (automatic n hit the cell budget)");
      throw ConfigError("n", msg.str());
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Hypothesis validation (no PDE solve)

struct ValidationReport {
  NonAlignmentReport nonalignment;
  MonotonicityReport monotonicity;
  bool schedule_ok = true;
  double zero_trace_gap = 0.0;
  bool pass() const { return nonalignment.pass() && monotonicity.pass() && schedule_ok; }
};

/// Checks the (Riemann-reduced) flux pair and the interface against the model
/// hypotheses.
inline ValidationReport validate_only(const RunConfig& cfg, const MarginOptions& opt = {}) {
  const FluxPair fp = riemann_reduce(build_flux(cfg), cfg.u_left, cfg.u_right);
  const InterfaceSurface surf = build_surface(cfg);
  const Box box(cfg.K, cfg.dim);
  ValidationReport rep;
  MarginOptions o = opt;
  // Keep the transverse lattice affordable in higher dimensions.
  if (cfg.dim >= 3) o.transverse_points = std::min(o.transverse_points, 41);
  if (cfg.dim >= 2) o.lambda_points = std::min(o.lambda_points, 401);
  rep.nonalignment = validate_nonalignment(fp, surf, box, o);
  const std::vector<Point> samples = transverse_lattice(box, 33);
  rep.monotonicity = validate_monotonicity(surf, samples);
  rep.schedule_ok = WeightSchedule(cfg.schedule_p).ratio_vanishes_along(cfg.eps);
  rep.zero_trace_gap = zero_trace_gap(fp, box);
  return rep;
}

inline std::string format_validation(const ValidationReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "non-alignment (lambda in [-" << r.nonalignment.options.lambda_max << ", " << r.nonalignment.options.lambda_max
     << "], " << r.nonalignment.options.lambda_points << " points; tolerance " << r.nonalignment.options.tolerance
     << ")\n";
  for (const auto& e : r.nonalignment.entries) {
    os << "  axis " << e.axis << ": "
       << (e.form == MarginForm::max_left_minus_min_right ? "int(max f_L - min f_R) <= -tol"
                                                           : "int(min f_L - max f_R) >= +tol")
       << "  sampled=" << e.sampled_margin;
    if (e.analytic_margin) os << "  analytic=" << *e.analytic_margin;
    os << "  " << (e.pass ? "PASS" : "FAIL") << "\n";
    os << "          ordering at zero (worst f_L(.,0) - f_R(.,0) "
       << (e.form == MarginForm::max_left_minus_min_right ? "<= 0" : ">= 0, sign flipped") << ")="
       << e.worst_zero_gap << "  " << (e.ordering_at_zero ? "PASS" : "FAIL") << "\n";
  }
  os << "  bounded: " << (r.nonalignment.bounded ? "PASS" : "FAIL") << "\n";
  for (std::size_t k = 0; k < r.nonalignment.transverse_sup_integrals.size(); ++k) {
    os << "  axis " << k + 1 << ": integral of sup_z |f(., z)| = " << r.nonalignment.transverse_sup_integrals[k] << "\n";
  }
  if (r.nonalignment.mixed_orientation) os << "  note: mixed interface orientation, outside the model hypotheses\n";
  os << "interface monotonicity (" << r.monotonicity.samples << " samples)\n";
  if (r.monotonicity.axes.empty()) os << "  no transverse coordinates: PASS\n";
  for (const auto& a : r.monotonicity.axes) {
    os << "  axis " << a.axis << ": declared sign " << a.declared_sign << "  dphi in [" << a.min_derivative << ", "
       << a.max_derivative << "]  min |dphi|=" << a.min_abs_derivative << "  " << (a.pass ? "PASS" : "FAIL") << "\n";
  }
  os << "weight schedule eps/a(eps)^2 decreasing along sweep: " << (r.schedule_ok ? "PASS" : "FAIL") << "\n";
  os << "zero-trace gap G = " << r.zero_trace_gap << "\n";
  os << "overall: " << (r.pass() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Sweeps

/// Artifact thresholds for the sweep verdicts.
struct VerdictThresholds {
  double beta_drop = 0.9;       ///< beta(eps_{i+1}) >= beta_drop * beta(eps_i)
  double positivity = 1e-6;
  double l1_factor = 1.1;
  double ledger = 1e-10;
};

enum class Verdict { pass, fail, insufficient_data };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::insufficient_data: return "insufficient data";
  }
  return "?";
}

struct RunSummary {
  double eps = 0.0;
  int n = 0;
  double h = 0.0;
  std::size_t steps = 0;
  QuadraticFit fit;
  double I_ratio = 0.0;          ///< I(T) / I(T/2)
  bool I_negative = false;       ///< I(t) < 0 for all samples with t >= T/4
  bool I_nonincreasing = false;
  double max_positivity = 0.0;
  double l1_margin = 0.0;        ///< max_t ||u(t)||_1 / (t G)
  double ledger_max_rel = 0.0;
  std::vector<double> band_fraction;  ///< band_mass(eta) / total_mass at T, per eta
  double boundary_ratio = 0.0;
  bool boundary_warning = false;
  double wall_seconds = 0.0;
  DiagnosticsSeries series;
};

struct SweepReport {
  RunConfig config;
  double zero_trace_gap = 0.0;
  VerdictThresholds thresholds;
  std::vector<RunSummary> runs;
  Verdict beta_trend = Verdict::insufficient_data;
  Verdict band_trend = Verdict::insufficient_data;
  Verdict positivity = Verdict::fail;
  Verdict l1_bound = Verdict::fail;
  Verdict ledger = Verdict::fail;
  double wall_seconds = 0.0;

  bool all_pass() const {
    for (Verdict v : {beta_trend, band_trend, positivity, l1_bound, ledger}) {
      if (v == Verdict::fail) return false;
    }
    return true;
  }
};

/// Solver blew up during one member of the sweep.
class SweepAbort : public std::runtime_error {
 public:
  SweepAbort(double eps, const InstabilityError& e)
      : std::runtime_error("eps=" + detail::shortest(eps) + ": " + e.what()), eps_(eps) {
    if (e.last_good()) last_good_ = std::make_shared<Field>(*e.last_good());
  }
  double eps() const noexcept { return eps_; }
  const Field* last_good() const noexcept { return last_good_.get(); }

 private:
  double eps_;
  std::shared_ptr<Field> last_good_;
};

struct SweepOptions {
  int jobs = 1;
  bool snapshots = false;                       ///< write one snapshot file per probe time
  std::optional<std::filesystem::path> out_dir;  ///< overrides the config value
};

/// Runs one member of the sweep and evaluates the per-run diagnostics.
inline RunSummary run_member(const RunConfig& cfg, const FluxPair& fp, const InterfaceSurface& surf, double eps,
                             double G, const std::optional<std::filesystem::path>& snapshot_dir = std::nullopt) {
  const int n = cfg.cells_for(eps);
  const Grid grid(cfg.dim, cfg.K, n);
  SchemeConfig scheme;
  scheme.eps = eps;
  scheme.T = cfg.T;
  Solver solver(grid, fp, surf, MollifierFamily(eps), scheme);
  const WeightSchedule sched(cfg.schedule_p);
  DiagnosticsRecorder rec(grid, surf, eps, sched, cfg.etas);
  const std::vector<double> probes = uniform_probe_times(cfg.T, cfg.probes);
  int probe_index = 0;
  auto probe = [&](const Field& u) {
    rec(u);
    if (snapshot_dir) {
      std::ofstream os(*snapshot_dir / ("t_" + std::to_string(probe_index) + ".dat"));
      write_snapshot(os, u, eps);
    }
    ++probe_index;
  };
  Field u(grid);
  RunResult rr = run(solver, u, probes, probe);

  RunSummary s;
  s.eps = eps;
  s.n = n;
  s.h = grid.h();
  s.steps = rr.steps;
  s.series = rec.finish(rr.ledger);
  const auto& ser = s.series;
  s.fit = fit_quadratic_decay(ser.times, ser.I, cfg.T / 4.0);
  s.I_ratio = interpolate(ser.times, ser.I, cfg.T) / interpolate(ser.times, ser.I, cfg.T / 2.0);
  s.I_negative = true;
  s.I_nonincreasing = true;
  for (std::size_t j = 0; j < ser.times.size(); ++j) {
    if (ser.times[j] >= cfg.T / 4.0 && !(ser.I[j] < 0.0)) s.I_negative = false;
    if (j > 0 && ser.I[j] > ser.I[j - 1]) s.I_nonincreasing = false;
    s.max_positivity = std::max(s.max_positivity, std::max(0.0, ser.max_u[j]));
    if (ser.times[j] > 0.0) s.l1_margin = std::max(s.l1_margin, ser.l1[j] / (ser.times[j] * G));
  }
  s.ledger_max_rel = ser.ledger_max_rel.value_or(0.0);
  for (const auto& b : ser.band) s.band_fraction.push_back(b.back() / ser.mass.back());
  s.boundary_ratio = rr.boundary_ratio_max;
  s.boundary_warning = rr.boundary_warning;
  s.wall_seconds = rr.wall_seconds;
  return s;
}

/// Applies the verdict rules to the per-epsilon rows.
inline void evaluate_verdicts(SweepReport& rep) {
  const auto& t = rep.thresholds;
  const auto& runs = rep.runs;
  auto all = [&](auto pred) {
    for (const auto& r : runs) {
      if (!pred(r)) return Verdict::fail;
    }
    return Verdict::pass;
  };
  rep.positivity = all([&](const RunSummary& r) { return r.max_positivity <= t.positivity; });
  rep.l1_bound = all([&](const RunSummary& r) { return r.l1_margin <= t.l1_factor; });
  rep.ledger = all([&](const RunSummary& r) { return r.ledger_max_rel <= t.ledger; });
  if (runs.size() < 2) {
    rep.beta_trend = Verdict::insufficient_data;
    rep.band_trend = Verdict::insufficient_data;
    return;
  }
  rep.beta_trend = Verdict::pass;
  rep.band_trend = Verdict::pass;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!(runs[i].fit.beta > 0.0)) rep.beta_trend = Verdict::fail;
    if (i == 0) continue;
    if (!(runs[i].fit.beta >= t.beta_drop * runs[i - 1].fit.beta)) rep.beta_trend = Verdict::fail;
    if (!(runs[i].band_fraction.front() >= runs[i - 1].band_fraction.front())) rep.band_trend = Verdict::fail;
  }
}

inline std::string eps_tag(double eps) { return detail::shortest(eps); }

inline void write_sweep_outputs(const SweepReport& rep, const std::filesystem::path& out);

/// Validates, runs every epsilon (in parallel up to `jobs`), evaluates verdicts
/// and writes CSVs plus the reports into the output directory.
inline SweepReport run_sweep(const RunConfig& cfg, const SweepOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const ValidationReport val = validate_only(cfg);
  if (!val.pass()) throw HypothesisError("hypothesis validation failed:\n" + format_validation(val));

  const FluxPair fp = riemann_reduce(build_flux(cfg), cfg.u_left, cfg.u_right);
  const InterfaceSurface surf = build_surface(cfg);
  const std::filesystem::path out = opts.out_dir.value_or(std::filesystem::path(cfg.out_dir));
  std::filesystem::create_directories(out);

  SweepReport rep;
  rep.config = cfg;
  rep.zero_trace_gap = val.zero_trace_gap;
  rep.runs.resize(cfg.eps.size());

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.eps.size(); i = next++) {
      try {
        std::optional<std::filesystem::path> snap;
        if (opts.snapshots) {
          snap = out / ("snapshots_eps_" + eps_tag(cfg.eps[i]));
          std::filesystem::create_directories(*snap);
        }
        rep.runs[i] = run_member(cfg, fp, surf, cfg.eps[i], rep.zero_trace_gap, snap);
      } catch (const InstabilityError& e) {
        std::lock_guard lock(err_mu);
        if (!failure) failure = std::make_exception_ptr(SweepAbort(cfg.eps[i], e));
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(cfg.eps.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  evaluate_verdicts(rep);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_sweep_outputs(rep, out);
  return rep;
}

// ---------------------------------------------------------------------------
// Report writers

inline std::string fmt(double v) { return detail::shortest(v); }

inline void write_sweep_csv(std::ostream& os, const SweepReport& rep) {
  os << "eps,n,h,steps,beta,r_squared,I_ratio,I_negative,max_positivity,l1_margin,ledger_max_rel";
  for (double eta : rep.config.etas) os << ",band_fraction_" << fmt(eta);
  os << ",boundary_ratio\n";
  for (const auto& r : rep.runs) {
    os << fmt(r.eps) << ',' << r.n << ',' << fmt(r.h) << ',' << r.steps << ',' << fmt(r.fit.beta) << ','
       << (r.fit.r_squared_defined ? fmt(r.fit.r_squared) : std::string("nan")) << ',' << fmt(r.I_ratio) << ','
       << (r.I_negative ? 1 : 0) << ',' << fmt(r.max_positivity) << ',' << fmt(r.l1_margin) << ','
       << fmt(r.ledger_max_rel);
    for (double f : r.band_fraction) os << ',' << fmt(f);
    os << ',' << fmt(r.boundary_ratio) << '\n';
  }
}

inline void write_sweep_markdown(std::ostream& os, const SweepReport& rep) {
  const auto& c = rep.config;
  const auto& t = rep.thresholds;
  os << "# vvflux sweep report\n\n";
  os << "fixture `" << c.fixture << "`, dim " << c.dim << ", K " << fmt(c.K) << ", T " << fmt(c.T) << ", interface `"
     << c.interface.kind << "`, gap " << fmt(c.fixture_params.gap) << ", Riemann states (" << fmt(c.u_left) << ", "
     << fmt(c.u_right) << ")\n\n";
  os << "zero-trace gap G = " << fmt(rep.zero_trace_gap) << "\n\n";
  os << "## Per-eps results\n\n";
  os << "| eps | n | steps | beta | r^2 | I(T)/I(T/2) | max positivity | L1 margin | ledger residual |";
  for (double eta : c.etas) os << " band fraction " << fmt(eta) << " |";
  os << "\n|---|---|---|---|---|---|---|---|---|";
  for (std::size_t i = 0; i < c.etas.size(); ++i) os << "---|";
  os << '\n';
  for (const auto& r : rep.runs) {
    os << "| " << fmt(r.eps) << " | " << r.n << " | " << r.steps << " | " << fmt(r.fit.beta) << " | "
       << (r.fit.r_squared_defined ? fmt(r.fit.r_squared) : std::string("nan")) << " | " << fmt(r.I_ratio) << " | "
       << fmt(r.max_positivity) << " | " << fmt(r.l1_margin) << " | " << fmt(r.ledger_max_rel) << " |";
    for (double f : r.band_fraction) os << ' ' << fmt(f) << " |";
    os << '\n';
  }
  os << "\n## Verdicts\n\n";
  os << "| verdict | rule | result |\n|---|---|---|\n";
  os << "| (a) concentration trend | beta > 0 and beta(eps_{i+1}) >= " << fmt(t.beta_drop) << " beta(eps_i) | "
     << verdict_name(rep.beta_trend) << " |\n";
  os << "| (b) interface concentration | band fraction at eta=" << fmt(c.etas.front())
     << " nondecreasing as eps decreases | " << verdict_name(rep.band_trend) << " |\n";
  os << "| (c) non-positivity | max u <= " << fmt(t.positivity) << " at all probes | " << verdict_name(rep.positivity)
     << " |\n";
  os << "| (d) L1 bound | ||u(t)||_1 <= " << fmt(t.l1_factor) << " t G | " << verdict_name(rep.l1_bound) << " |\n";
  os << "| (e) conservation ledger | max relative residual <= " << fmt(t.ledger) << " | " << verdict_name(rep.ledger)
     << " |\n\n";
  os << "Thresholds are harness choices; the underlying inequalities carry unspecified constants.\n\n";
  bool any_warning = false;
  for (const auto& r : rep.runs) {
    if (r.boundary_warning) {
      if (!any_warning) os << "## Warnings\n\n";
      any_warning = true;
      os << "- eps=" << fmt(r.eps) << ": domain too small, boundary layer carries " << fmt(r.boundary_ratio)
         << " of max |u| (guard " << fmt(kBoundaryGuard) << ")\n";
    }
  }
  if (any_warning) os << '\n';
  os << "## Provenance\n\nvvflux " << kVersion << "\n\n```json\n" << c.source_text;
  if (c.source_text.empty() || c.source_text.back() != '\n') os << '\n';
  os << "```\n";
}

/// Wall times and timestamps, kept out of the deterministic report files.
inline void write_provenance(std::ostream& os, const SweepReport& rep) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["finished_unix"] = static_cast<long long>(std::time(nullptr));
  j["wall_seconds"] = rep.wall_seconds;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : rep.runs) runs.push_back({{"eps", r.eps}, {"wall_seconds", r.wall_seconds}});
  j["runs"] = runs;
  os << j.dump(2) << '\n';
}

/// Writes diagnostics_eps_<eps>.csv for each run, sweep_report.{csv,md} and provenance.json.
inline void write_sweep_outputs(const SweepReport& rep, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  for (const auto& r : rep.runs) {
    std::ofstream os(out / ("diagnostics_eps_" + eps_tag(r.eps) + ".csv"));
    write_diagnostics_csv(os, r.series);
  }
  {
    std::ofstream os(out / "sweep_report.csv");
    write_sweep_csv(os, rep);
  }
  {
    std::ofstream os(out / "sweep_report.md");
    write_sweep_markdown(os, rep);
  }
  std::ofstream os(out / "provenance.json");
  write_provenance(os, rep);
}

}  // namespace vvflux
