#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "vvflux/flux.hpp"

namespace {

using vvflux::Point;
constexpr double pi = std::numbers::pi;

// Oracles written independently of the library.
double oracle_gauss_integral(double K) { return std::sqrt(pi) * std::erf(K); }

TEST(CombinedFlux, OneSidedOutsideBand) {
  const auto fp = vvflux::arctan_gap();
  const auto surf = vvflux::constant_surface(1, 0.0);
  const vvflux::MollifierFamily fam(0.1);
  for (double u : {-3.0, -0.2, 0.0, 1.5}) {
    EXPECT_EQ(vvflux::combined_flux(1, Point{-0.1}, u, fp, surf, fam), std::atan(u) - 2.0);
    EXPECT_EQ(vvflux::combined_flux(1, Point{-2.0}, u, fp, surf, fam), std::atan(u) - 2.0);
    EXPECT_EQ(vvflux::combined_flux(1, Point{0.1}, u, fp, surf, fam), std::atan(u) + 2.0);
    EXPECT_EQ(vvflux::combined_flux(1, Point{0.5}, u, fp, surf, fam), std::atan(u) + 2.0);
  }
}

TEST(CombinedFlux, EqualSidesGiveTheCommonFlux) {
  const auto fp = vvflux::linear_flux({1.7});
  const auto surf = vvflux::constant_surface(1, 0.0);
  const vvflux::MollifierFamily fam(0.1);
  for (double x : {-0.09, -0.03, 0.0, 0.04, 0.099}) {
    EXPECT_NEAR(vvflux::combined_flux(1, Point{x}, 0.8, fp, surf, fam), 1.7 * 0.8, 1e-15);
  }
}

TEST(CombinedFlux, ContinuousAcrossBand) {
  const auto fp = vvflux::gauss_arctan(2);
  const auto surf = vvflux::affine_surface({-1.0}, 0.0);
  const vvflux::MollifierFamily fam(0.05);
  for (int k = 1; k <= 2; ++k) {
    double prev = vvflux::combined_flux(k, Point{-0.2, 0.3}, -0.4, fp, surf, fam);
    for (int i = 1; i <= 4000; ++i) {
      const double x1 = -0.2 + 0.2 * i / 4000.0;
      const double v = vvflux::combined_flux(k, Point{x1, 0.3}, -0.4, fp, surf, fam);
      // Lipschitz constant ~ 4 * max omega' / eps
      ASSERT_LE(std::abs(v - prev), 4.0 * 2.0 / 0.05 * (0.2 / 4000.0));
      prev = v;
    }
  }
}

TEST(FluxDerivative, Examples) {
  const auto fp = vvflux::arctan_gap();
  const auto surf = vvflux::constant_surface(1, 0.0);
  const vvflux::MollifierFamily fam(0.1);
  EXPECT_DOUBLE_EQ(vvflux::flux_u_derivative(1, Point{0.5}, 0.0, fp, surf, fam), 1.0);
  const auto flat = vvflux::constant_gap(1, 4.0);
  EXPECT_EQ(vvflux::flux_u_derivative(1, Point{0.0}, 0.3, flat, surf, fam), 0.0);
}

TEST(FluxDerivative, FiniteDifferenceFallback) {
  vvflux::FluxComponent c;
  c.left = [](std::span<const double>, double l) { return l * l; };
  c.right = [](std::span<const double>, double l) { return std::sin(l); };
  const vvflux::FluxPair fp(1, "plain", {c});
  const auto surf = vvflux::constant_surface(1, 0.0);
  const vvflux::MollifierFamily fam(0.1);
  EXPECT_NEAR(vvflux::flux_u_derivative(1, Point{-1.0}, 0.7, fp, surf, fam), 1.4, 1e-6);
  EXPECT_NEAR(vvflux::flux_u_derivative(1, Point{1.0}, 0.7, fp, surf, fam), std::cos(0.7), 1e-6);
  const auto s = fp.sample(1, std::span<const double>{}, 0.7);
  EXPECT_NEAR(s.dleft, 1.4, 1e-6);
  EXPECT_NEAR(s.dright, std::cos(0.7), 1e-6);
}

TEST(Margin, ArctanAnalyticAndSampled) {
  const auto fp = vvflux::arctan_gap();
  const auto surf = vvflux::constant_surface(1, 0.0);
  const vvflux::Box box(5.0, 1);
  const auto e = vvflux::nonalignment_margin(1, fp, surf, box, {});
  ASSERT_TRUE(e.analytic_margin.has_value());
  EXPECT_NEAR(*e.analytic_margin, pi - 4.0, 1e-12);
  EXPECT_NEAR(e.sampled_margin, pi - 4.0, 2e-3);
  // a finite lambda window under-resolves sup f_L and over-resolves inf f_R
  EXPECT_LE(e.sampled_margin, *e.analytic_margin);
  EXPECT_TRUE(e.pass);
  EXPECT_TRUE(e.ordering_at_zero);
}

TEST(Margin, SampledMarginIncreasesWithLambdaTowardAnalytic) {
  const auto fp = vvflux::arctan_gap();
  const auto surf = vvflux::constant_surface(1, 0.0);
  const vvflux::Box box(5.0, 1);
  double prev = -1e300;
  for (double L : {1.0, 10.0, 100.0, 1000.0}) {
    vvflux::MarginOptions opt;
    opt.lambda_max = L;
    opt.lambda_points = 2001;
    const auto e = vvflux::nonalignment_margin(1, fp, surf, box, opt);
    // oracle: both envelopes are attained at lambda = +-L
    EXPECT_NEAR(e.sampled_margin, 2.0 * std::atan(L) - 4.0, 1e-15);
    EXPECT_LE(e.sampled_margin, pi - 4.0);
    EXPECT_GE(e.sampled_margin, prev);
    prev = e.sampled_margin;
  }
}

TEST(Margin, GaussArctanTwoDimensional) {
  const auto fp = vvflux::gauss_arctan(2);
  const auto surf = vvflux::affine_surface({-1.0}, 0.0);
  const vvflux::Box box(5.0, 2);
  vvflux::MarginOptions opt;
  const double oracle = (pi - 4.0) * oracle_gauss_integral(5.0);
  for (int k = 1; k <= 2; ++k) {
    const auto e = vvflux::nonalignment_margin(k, fp, surf, box, opt);
    EXPECT_EQ(e.form, vvflux::MarginForm::max_left_minus_min_right);
    EXPECT_NEAR(e.sampled_margin, oracle, 0.01 * std::abs(oracle));
    EXPECT_NEAR(*e.analytic_margin, (pi - 4.0) * std::sqrt(pi), 0.01 * std::abs(oracle));
    EXPECT_TRUE(e.pass);
  }
}

TEST(Margin, IncreasingInterfaceUsesOppositeForm) {
  const auto fp = vvflux::gauss_arctan(2, 4.0, +1);
  const auto surf = vvflux::affine_surface({1.0}, 0.0);
  const vvflux::Box box(5.0, 2);
  const auto rep = vvflux::validate_nonalignment(fp, surf, box, {});
  ASSERT_EQ(rep.entries.size(), 2u);
  EXPECT_EQ(rep.entries[0].form, vvflux::MarginForm::max_left_minus_min_right);
  EXPECT_EQ(rep.entries[1].form, vvflux::MarginForm::min_left_minus_max_right);
  EXPECT_NEAR(*rep.entries[1].analytic_margin, (4.0 - pi) * std::sqrt(pi), 1e-6);
  EXPECT_TRUE(rep.pass());
  EXPECT_FALSE(rep.mixed_orientation);

  // Same flux with the decreasing form on axis 2 must fail.
  const auto down = vvflux::affine_surface({-1.0}, 0.0);
  EXPECT_FALSE(vvflux::validate_nonalignment(fp, down, box, {}).pass());
}

TEST(Margin, MixedOrientationIsFlagged) {
  const auto fp = vvflux::gauss_arctan(3);
  const auto surf = vvflux::affine_surface({-1.0, 1.0}, 0.0);
  vvflux::MarginOptions opt;
  opt.transverse_points = 41;
  opt.lambda_points = 201;
  const auto rep = vvflux::validate_nonalignment(fp, surf, vvflux::Box(3.0, 3), opt);
  EXPECT_TRUE(rep.mixed_orientation);
}

TEST(Margin, ZeroGapAndReversedGapFail) {
  const auto surf = vvflux::constant_surface(1, 0.0);
  const vvflux::Box box(5.0, 1);
  const auto zero = vvflux::nonalignment_margin(1, vvflux::arctan_gap(0.0), surf, box, {});
  EXPECT_FALSE(zero.pass);
  const auto rev = vvflux::nonalignment_margin(1, vvflux::arctan_gap(-1.0), surf, box, {});
  EXPECT_FALSE(rev.ordering_at_zero);
  EXPECT_NEAR(rev.worst_zero_gap, 1.0, 1e-12);
}

TEST(Margin, EmptyLambdaGridIsUsageError) {
  vvflux::MarginOptions opt;
  opt.lambda_points = 0;
  EXPECT_THROW(vvflux::nonalignment_margin(1, vvflux::arctan_gap(), vvflux::constant_surface(1, 0.0),
                                           vvflux::Box(5.0, 1), opt),
               vvflux::UsageError);
}

TEST(ZeroTraceGap, Examples) {
  EXPECT_NEAR(vvflux::zero_trace_gap(vvflux::arctan_gap(), vvflux::Box(5.0, 1)), 4.0, 1e-15);
  EXPECT_EQ(vvflux::zero_trace_gap(vvflux::linear_flux({2.0, 1.0}), vvflux::Box(5.0, 2)), 0.0);
  // per axis 4 * integral of e^{-x^2} on [-5, 5]; two axes in d = 2
  const double G2 = vvflux::zero_trace_gap(vvflux::gauss_arctan(2), vvflux::Box(5.0, 2));
  const double per_axis = 4.0 * oracle_gauss_integral(5.0);
  EXPECT_NEAR(G2, 2.0 * per_axis, 0.01 * per_axis);
  EXPECT_NEAR(G2 / 2.0, 4.0 * std::sqrt(pi), 0.01 * 4.0 * std::sqrt(pi));
}

TEST(ZeroTraceGap, NonNegative) {
  for (double gap : {-3.0, -0.5, 0.0, 0.5, 3.0}) {
    EXPECT_GE(vvflux::zero_trace_gap(vvflux::arctan_gap(gap), vvflux::Box(5.0, 1)), 0.0);
    EXPECT_GE(vvflux::zero_trace_gap(vvflux::gauss_arctan(2, gap), vvflux::Box(5.0, 2), 41), 0.0);
  }
}

TEST(Riemann, ZeroShiftIsIdentity) {
  const auto fp = vvflux::gauss_arctan(2);
  const auto g = vvflux::riemann_reduce(fp, 0.0, 0.0);
  EXPECT_EQ(g.name(), fp.name());
  const Point xh{0.3};
  for (double l : {-2.0, 0.0, 0.7}) {
    for (int k = 1; k <= 2; ++k) {
      EXPECT_EQ(g.component(k).left(xh, l), fp.component(k).left(xh, l));
      EXPECT_EQ(g.component(k).right(xh, l), fp.component(k).right(xh, l));
    }
  }
}

TEST(Riemann, ZeroTracesAreShiftedStates) {
  const auto fp = vvflux::gauss_arctan(2);
  const double uL = -0.75, uR = 1.25;
  const auto g = vvflux::riemann_reduce(fp, uL, uR);
  for (const Point& xh : vvflux::transverse_lattice(vvflux::Box(5.0, 2), 21)) {
    for (int k = 1; k <= 2; ++k) {
      EXPECT_EQ(g.component(k).left(xh, 0.0), fp.component(k).left(xh, uL));
      EXPECT_EQ(g.component(k).right(xh, 0.0), fp.component(k).right(xh, uR));
      const auto s = g.sample(k, xh, 0.0);
      EXPECT_EQ(s.left, fp.component(k).left(xh, uL));
      EXPECT_EQ(s.right, fp.component(k).right(xh, uR));
      const auto z = g.zero_trace(k, xh);
      EXPECT_EQ(z.first, fp.component(k).left(xh, uL));
      EXPECT_EQ(z.second, fp.component(k).right(xh, uR));
    }
  }
}

TEST(Riemann, EnvelopesAreShiftInvariant) {
  const auto fp = vvflux::arctan_gap();
  const auto g = vvflux::riemann_reduce(fp, 1.0, 0.0);
  const std::span<const double> none{};
  EXPECT_EQ(g.component(1).sup_left(none), fp.component(1).sup_left(none));
  vvflux::MarginOptions opt;
  opt.lambda_max = 1e6;
  opt.lambda_points = 200001;
  const auto e = vvflux::nonalignment_margin(1, g, vvflux::constant_surface(1, 0.0), vvflux::Box(5.0, 1), opt);
  EXPECT_NEAR(e.sampled_margin, pi - 4.0, 1e-5);
}

TEST(Riemann, InverseShiftIsIdentity) {
  const auto fp = vvflux::gauss_arctan(2);
  const auto back = vvflux::riemann_reduce(vvflux::riemann_reduce(fp, 0.4, -1.3), -0.4, 1.3);
  for (const Point& xh : vvflux::transverse_lattice(vvflux::Box(3.0, 2), 13)) {
    for (double l : {-5.0, -0.1, 0.0, 2.0}) {
      for (int k = 1; k <= 2; ++k) {
        EXPECT_NEAR(back.component(k).left(xh, l), fp.component(k).left(xh, l), 1e-15);
        EXPECT_NEAR(back.component(k).right(xh, l), fp.component(k).right(xh, l), 1e-15);
      }
    }
  }
}

TEST(Fixtures, Registry) {
  EXPECT_EQ(vvflux::make_fixture("arctan_gap", 1).dim(), 1);
  EXPECT_EQ(vvflux::make_fixture("gauss_arctan", 2).dim(), 2);
  EXPECT_THROW(vvflux::make_fixture("arctan_gap", 2), vvflux::UsageError);
  EXPECT_THROW(vvflux::make_fixture("gauss_arctan", 1), vvflux::UsageError);
  EXPECT_THROW(vvflux::make_fixture("burgers", 1), vvflux::UsageError);
}

TEST(Fixtures, FusedSampleMatchesSeparateCalls) {
  const auto c = vvflux::gauss_arctan_component(4.0, 1.0);
  const Point xh{0.4};
  for (double l : {-3.0, 0.0, 0.25}) {
    const auto s = c.fused(xh, l);
    EXPECT_EQ(s.left, c.left(xh, l));
    EXPECT_EQ(s.right, c.right(xh, l));
    EXPECT_EQ(s.dleft, c.dleft(xh, l));
  }
}

}  // namespace
