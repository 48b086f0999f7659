#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "vvflux/diagnostics.hpp"
#include "vvflux/solver.hpp"

namespace {

using namespace vvflux;

SchemeConfig scheme(double eps, double T = 1.0) {
  SchemeConfig c;
  c.eps = eps;
  c.T = T;
  return c;
}

TEST(Grid, Geometry) {
  const Grid g(2, 5.0, 10);
  EXPECT_DOUBLE_EQ(g.h(), 1.0);
  EXPECT_EQ(g.cells(), 100u);
  EXPECT_DOUBLE_EQ(g.center(0), -4.5);
  EXPECT_DOUBLE_EQ(g.face(10), 5.0);
  EXPECT_EQ(g.stride(1), 1u);
  EXPECT_EQ(g.stride(0), 10u);
  EXPECT_THROW(Grid(1, 5.0, 7), UsageError);
  EXPECT_THROW(Grid(4, 5.0, 8), UsageError);
}

TEST(Snapshot, RoundTrip) {
  const Grid g(2, 1.0, 8);
  Field u(g, 0.375);
  for (std::size_t c = 0; c < g.cells(); ++c) u.values[c] = -std::sqrt(static_cast<double>(c)) / 7.0;
  std::stringstream ss;
  write_snapshot(ss, u, 0.05);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "# t=0.375 d=2 n=8 K=1 eps=0.05");
  const Snapshot back = read_snapshot(ss);
  EXPECT_EQ(back.eps, 0.05);
  EXPECT_EQ(back.field.t, 0.375);
  EXPECT_TRUE(back.field.grid == g);
  EXPECT_EQ(back.field.values, u.values);
}

TEST(Step, ZeroIsFixedPointForEqualSides) {
  const Grid g(1, 5.0, 100);
  Field u(g);
  const Field out = step(u, linear_flux({2.0}), constant_surface(1, 0.0), MollifierFamily(0.1), scheme(0.1));
  for (double v : out.values) EXPECT_EQ(v, 0.0);
}

TEST(Step, FirstStepIsNegativeInsideBandOnly) {
  const double eps = 0.05;
  const Grid g(1, 5.0, 1000);
  Field u(g);
  const auto surf = constant_surface(1, 0.0);
  const Field out = step(u, arctan_gap(), surf, MollifierFamily(eps), scheme(eps));
  int negatives = 0;
  for (int i = 0; i < g.n(); ++i) {
    const double s = g.center(i);
    const double v = out.values[static_cast<std::size_t>(i)];
    if (std::abs(s) < eps) {
      EXPECT_LT(v, 0.0) << "s=" << s;
      ++negatives;
    }
    if (std::abs(s) >= eps + g.h()) {
      EXPECT_EQ(v, 0.0) << "s=" << s;
    }
  }
  EXPECT_GT(negatives, 0);
}

TEST(StableDt, DiffusiveExample) {
  const Grid g(1, 5.0, 1000);
  ASSERT_DOUBLE_EQ(g.h(), 0.01);
  const Field u(g);
  const double dt = stable_dt(u, linear_flux({0.0}), constant_surface(1, 0.0), MollifierFamily(0.025), scheme(0.025));
  EXPECT_NEAR(dt, 0.45 * 1e-4 / 0.05, 1e-15);
  EXPECT_NEAR(dt, 9e-4, 1e-15);
}

TEST(StableDt, AdvectiveBoundDominatesForFastWaves) {
  const Grid g(1, 5.0, 100);
  const Field u(g);
  const double dt = stable_dt(u, linear_flux({1000.0}), constant_surface(1, 0.0), MollifierFamily(0.1), scheme(0.1));
  EXPECT_NEAR(dt, 0.45 * g.h() / (1.1 * 1000.0), 1e-15);
}

TEST(SchemeConfig, Validation) {
  SchemeConfig c = scheme(0.1);
  c.cfl_advective = 0.5;
  EXPECT_THROW(c.validate(), UsageError);
  c = scheme(0.1);
  c.diffusion_safety = 0.0;
  EXPECT_THROW(c.validate(), UsageError);
  c = scheme(-1.0);
  EXPECT_ANY_THROW(c.validate());
}

TEST(Step, PureDiffusionMaximumPrinciple) {
  const Grid g(2, 1.0, 32);
  Field u(g);
  for (std::size_t c = 0; c < g.cells(); ++c) u.values[c] = std::sin(0.37 * static_cast<double>(c * c % 101)) - 0.3;
  const auto surf = affine_surface({-1.0}, 0.0);
  Solver s(g, linear_flux({0.0, 0.0}), surf, MollifierFamily(0.1), scheme(0.1));
  for (int k = 0; k < 50; ++k) {
    const double lo = std::min(0.0, *std::min_element(u.values.begin(), u.values.end()));
    const double hi = std::max(0.0, *std::max_element(u.values.begin(), u.values.end()));
    s.advance(u);
    for (double v : u.values) {
      ASSERT_GE(v, lo - 1e-15);
      ASSERT_LE(v, hi + 1e-15);
    }
  }
}

TEST(Step, PureDiffusionPreservesSign) {
  const Grid g(1, 2.0, 64);
  Field u(g);
  for (int i = 20; i < 40; ++i) u.values[static_cast<std::size_t>(i)] = -1.0 - 0.1 * i;
  Solver s(g, linear_flux({0.0}), constant_surface(1, 0.0), MollifierFamily(0.05), scheme(0.05));
  for (int k = 0; k < 2000; ++k) {
    s.advance(u);
    for (double v : u.values) ASSERT_LE(v, 0.0);
  }
}

TEST(Ledger, ExactZeroForInteriorDiffusion) {
  // dyadic parameters: every operation in the update is exact
  const Grid g(1, 1.0, 16);
  Field u(g);
  u.values[8] = 1.0;
  u.values[9] = -0.5;
  Solver s(g, linear_flux({0.0}), constant_surface(1, 0.0), MollifierFamily(0.125), scheme(0.125));
  const LedgerEntry e = s.advance_fixed(u, 1.0 / 64.0);
  EXPECT_EQ(e.boundary_inflow, 0.0);
  EXPECT_EQ(e.delta_mass, 0.0);
  const std::vector<LedgerEntry> one{e};
  EXPECT_EQ(ledger_check(one), 0.0);
}

TEST(Ledger, FixtureRunsConserve) {
  const double eps = 0.1;
  const Grid g1(1, 5.0, 500);
  auto [traj, res] = run_collect(g1, arctan_gap(), constant_surface(1, 0.0), MollifierFamily(eps), scheme(eps, 0.5),
                                 uniform_probe_times(0.5, 5));
  EXPECT_LE(ledger_check(res.ledger), 1e-10);
  const Grid g2(2, 3.0, 60);
  auto r2 = run_collect(g2, gauss_arctan(2), affine_surface({-1.0}, 0.0), MollifierFamily(0.5), scheme(0.5, 0.2),
                        uniform_probe_times(0.2, 3));
  EXPECT_LE(ledger_check(r2.second.ledger), 1e-10);
}

TEST(Ledger, DetectsCorruptedUpdate) {
  const Grid g(1, 5.0, 200);
  Field u(g);
  Solver s(g, arctan_gap(), constant_surface(1, 0.0), MollifierFamily(0.25), scheme(0.25));
  std::vector<LedgerEntry> ledger;
  for (int k = 0; k < 10; ++k) ledger.push_back(s.advance(u));
  ASSERT_LE(ledger_check(ledger), 1e-10);
  StepHooks bad;
  bad.corrupt_cell = 100;
  bad.corrupt_increment = 1e-6;
  ledger.push_back(s.advance(u, std::numeric_limits<double>::infinity(), bad));
  EXPECT_GT(ledger_check(ledger), 1e-6);
}

TEST(Run, ZeroHorizonGivesSingleZeroSnapshot) {
  const Grid g(1, 5.0, 100);
  auto [traj, res] = run_collect(g, arctan_gap(), constant_surface(1, 0.0), MollifierFamily(0.1), scheme(0.1, 0.0),
                                 {0.0});
  ASSERT_EQ(traj.size(), 1u);
  EXPECT_EQ(traj[0].t, 0.0);
  for (double v : traj[0].values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(res.steps, 0u);
}

TEST(Run, ProbesLandExactly) {
  const Grid g(1, 5.0, 200);
  const auto probes = uniform_probe_times(0.3, 7);
  auto [traj, res] = run_collect(g, arctan_gap(), constant_surface(1, 0.0), MollifierFamily(0.1), scheme(0.1, 0.3),
                                 probes);
  ASSERT_EQ(traj.size(), probes.size());
  for (std::size_t j = 0; j < probes.size(); ++j) EXPECT_EQ(traj[j].t, probes[j]);
  EXPECT_EQ(res.ledger.size(), res.steps);
}

TEST(Run, Deterministic) {
  const Grid g(1, 5.0, 400);
  const auto probes = uniform_probe_times(0.4, 5);
  auto a = run_collect(g, arctan_gap(), constant_surface(1, 0.0), MollifierFamily(0.1), scheme(0.1, 0.4), probes);
  auto b = run_collect(g, arctan_gap(), constant_surface(1, 0.0), MollifierFamily(0.1), scheme(0.1, 0.4), probes);
  ASSERT_EQ(a.first.size(), b.first.size());
  for (std::size_t j = 0; j < a.first.size(); ++j) EXPECT_EQ(a.first[j].values, b.first[j].values);
}

TEST(Run, NonFiniteAbortsWithDump) {
  FluxComponent c = gauss_arctan_component(4.0, 1.0);
  c.fused = nullptr;
  c.left = [](std::span<const double>, double l) {
    return l < 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::atan(l) - 2.0;
  };
  const FluxPair fp(1, "poisoned", {c});
  const Grid g(1, 5.0, 100);
  Solver s(g, fp, constant_surface(1, 0.0), MollifierFamily(0.5), scheme(0.5));
  Field u(g);
  try {
    run(s, u, {1.0}, {});
    FAIL() << "expected InstabilityError";
  } catch (const InstabilityError& e) {
    ASSERT_NE(e.last_good(), nullptr);
    for (double v : e.last_good()->values) EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(e.step(), 1u);
  }
}

TEST(Run, DeskScaleFixtureRun) {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid g(1, 5.0, 1000);
  auto [traj, res] = run_collect(g, arctan_gap(), constant_surface(1, 0.0), MollifierFamily(0.05), scheme(0.05, 1.0),
                                 uniform_probe_times(1.0, 41));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(traj.size(), 41u);
  for (const Field& f : traj) {
    for (double v : f.values) ASSERT_TRUE(std::isfinite(v));
  }
  EXPECT_LE(secs, 60.0);
}

TEST(Run, RefinementConsistency) {
  const double eps = 0.1, T = 1.0;
  double l1[2];
  int idx = 0;
  for (int n : {500, 1000}) {
    const Grid g(1, 5.0, n);
    auto [traj, res] = run_collect(g, arctan_gap(), constant_surface(1, 0.0), MollifierFamily(eps), scheme(eps, T), {T});
    l1[idx++] = l1_norm(traj.back());
  }
  EXPECT_LE(std::abs(l1[1] - l1[0]) / l1[1], 0.05);
}

double center_of_mass(const Field& u) {
  double m = 0.0, mx = 0.0;
  for (int i = 0; i < u.grid.n(); ++i) {
    m += u.values[static_cast<std::size_t>(i)];
    mx += u.values[static_cast<std::size_t>(i)] * u.grid.center(i);
  }
  return mx / m;
}

// A u-independent gap keeps the source -d/dx F symmetric about the interface,
// so the mass must not drift.
TEST(Run, SymmetricSourceDoesNotDrift) {
  const double eps = 0.05;
  const Grid g(1, 5.0, 500);
  auto [traj, res] = run_collect(g, constant_gap(1, 4.0), constant_surface(1, 0.0), MollifierFamily(eps),
                                 scheme(eps, 1.0), uniform_probe_times(1.0, 21));
  for (std::size_t j = 1; j < traj.size(); ++j) EXPECT_LE(std::abs(center_of_mass(traj[j])), 2.0 * g.h());
}

TEST(Run, BoundaryGuardFlagsSmallDomains) {
  const Grid g(1, 0.5, 50);
  auto [traj, res] = run_collect(g, arctan_gap(), constant_surface(1, 0.0), MollifierFamily(0.1), scheme(0.1, 1.0),
                                 uniform_probe_times(1.0, 3));
  EXPECT_TRUE(res.boundary_warning);
  const Grid big(1, 5.0, 500);
  auto ok = run_collect(big, arctan_gap(), constant_surface(1, 0.0), MollifierFamily(0.1), scheme(0.1, 1.0),
                        uniform_probe_times(1.0, 3));
  EXPECT_FALSE(ok.second.boundary_warning);
}

TEST(Mms, AdvectionDiffusionFirstOrder) {
  const ConvergenceTable t = run_mms(MmsProblem{});
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_GE(t.observed_order, 0.9);
}

TEST(Mms, HeatEquation) {
  MmsProblem p;
  p.velocity = 0.0;
  const ConvergenceTable t = run_mms(p);
  EXPECT_GE(t.observed_order, 0.9);
  EXPECT_GE(t.error_ratio, 1.8);
}

TEST(Mms, KernelConservesMass) {
  // independent check of the reference solution: mass is preserved
  const MmsProblem p;
  double m0 = 0.0, m1 = 0.0;
  const int N = 20000;
  for (int i = 0; i < N; ++i) {
    const double x = -10.0 + 20.0 * (i + 0.5) / N;
    m0 += advected_heat_kernel(p, 0.0, x);
    m1 += advected_heat_kernel(p, 1.0, x);
  }
  EXPECT_NEAR(m0, m1, 1e-9 * m0);
  EXPECT_NEAR(m0 * 20.0 / N, p.width * std::sqrt(2.0 * std::numbers::pi), 1e-9);
}

}  // namespace
