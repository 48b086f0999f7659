// vvflux command-line front end.
//
// Exit codes: 0 all verdicts pass, 2 a verdict failed, 3 configuration or
// hypothesis validation failed, 4 solver instability.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "vvflux/vvflux.hpp"

namespace {

constexpr int kExitVerdict = 2;
constexpr int kExitConfig = 3;
constexpr int kExitUnstable = 4;

int cmd_run(const std::string& config_path, const std::string& out_override, int jobs, bool snapshots) {
  vvflux::RunConfig cfg;
  try {
    cfg = vvflux::load_config(config_path);
  } catch (const vvflux::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  vvflux::SweepOptions opts;
  opts.jobs = jobs;
  opts.snapshots = snapshots;
  if (!out_override.empty()) opts.out_dir = out_override;
  const std::filesystem::path out = opts.out_dir.value_or(cfg.out_dir);
  try {
    const vvflux::SweepReport rep = vvflux::run_sweep(cfg, opts);
    vvflux::write_sweep_markdown(std::cout, rep);
    std::cout << "\noutputs written to " << out.string() << '\n';
    return rep.all_pass() ? 0 : kExitVerdict;
  } catch (const vvflux::HypothesisError& e) {
    std::cerr << e.what();
    return kExitConfig;
  } catch (const vvflux::SweepAbort& e) {
    std::cerr << "solver instability: " << e.what() << '\n';
    if (e.last_good()) {
      std::filesystem::create_directories(out);
      const auto dump = out / ("instability_eps_" + vvflux::eps_tag(e.eps()) + ".dat");
      std::ofstream os(dump);
      vvflux::write_snapshot(os, *e.last_good(), e.eps());
      std::cerr << "last finite state written to " << dump.string() << '\n';
    }
    return kExitUnstable;
  }
}

int cmd_validate(const std::string& config_path) {
  try {
    const vvflux::RunConfig cfg = vvflux::load_config(config_path);
    const vvflux::ValidationReport rep = vvflux::validate_only(cfg);
    std::cout << vvflux::format_validation(rep);
    return rep.pass() ? 0 : kExitConfig;
  } catch (const vvflux::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

bool print_table(const char* title, const vvflux::ConvergenceTable& t, double min_order, double min_ratio) {
  std::cout << title << '\n';
  for (const auto& r : t.rows) {
    std::cout << "  n=" << std::setw(5) << r.n << "  h=" << std::setw(10) << r.h << "  L1 error=" << r.l1_error << '\n';
  }
  const bool ok = t.observed_order >= min_order && t.error_ratio >= min_ratio;
  std::cout << "  error ratio " << t.error_ratio << ", observed order " << t.observed_order << " (need order >= "
            << min_order << ", ratio >= " << min_ratio << "): " << (ok ? "PASS" : "FAIL") << "\n";
  return ok;
}

int cmd_mms() {
  vvflux::MmsProblem advect;
  vvflux::MmsProblem heat;
  heat.velocity = 0.0;
  bool ok = print_table(("advection-diffusion, c=1, eps=" + vvflux::detail::shortest(advect.eps)).c_str(), vvflux::run_mms(advect), 0.9, 1.8);
  ok = print_table(("heat equation, c=0, eps=" + vvflux::detail::shortest(heat.eps)).c_str(), vvflux::run_mms(heat), 0.9, 1.8) && ok;
  return ok ? 0 : kExitVerdict;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vvflux: vanishing-viscosity simulator for conservation laws with discontinuous flux"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int jobs = 1;
  bool snapshots = false;
  auto* run = app.add_subcommand("run", "run an eps sweep and write diagnostics and reports");
  run->add_option("config", config_path, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory (overrides out_dir)");
  run->add_option("--jobs", jobs, "runs executed in parallel")->check(CLI::PositiveNumber);
  run->add_flag("--snapshots", snapshots, "dump the field at every probe time");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check flux and interface hypotheses without solving");
  validate->add_option("config", validate_path, "configuration file (JSON)")->required()->check(CLI::ExistingFile);

  auto* mms = app.add_subcommand("mms", "solver verification against analytic solutions");
  auto* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*run) return cmd_run(config_path, out_dir, jobs, snapshots);
  if (*validate) return cmd_validate(validate_path);
  if (*mms) return cmd_mms();
  if (*version) {
    std::cout << "vvflux " << vvflux::kVersion << '\n';
    return 0;
  }
  return 0;
}
