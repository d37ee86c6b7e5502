#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"

using namespace qbounds;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<SiteAmplitudes> plus_site() {
  const double h = 1 / std::sqrt(2.0);
  return {{h, h}};
}

}  // namespace

TEST(PointToRegion, Examples) {
  EXPECT_EQ(point_to_region(0.0, 0.3).p_succ_lb, 1.0);
  EXPECT_NEAR(point_to_region(0.04, 0.2).p_succ_lb, 0.0, 1e-15);
  EXPECT_NEAR(point_to_region(0.01, 0.2).p_succ_lb, 0.75, 1e-15);
  const auto c = point_to_region(1.0, 0.5);
  EXPECT_EQ(c.p_succ_lb, 0.0);
  EXPECT_FALSE(c.note.empty());
  EXPECT_THROW(point_to_region(0.1, 0.0), std::invalid_argument);
  MseBoundInput in{0.2, 0.01, 2 * kPi, circle_ball_growth};
  EXPECT_NEAR(point_to_region(in).p_succ_lb, 0.75, 1e-15);
  EXPECT_NEAR(circle_ball_growth(0.1), 0.2, 1e-15);
  EXPECT_NEAR(circle_ball_growth(10.0), 2 * kPi, 1e-15);
}

TEST(MseBounds, Examples) {
  EXPECT_NEAR(heisenberg_mse_bound(1.0, 1), 4 * kPi * kPi / 27, 1e-15);
  EXPECT_NEAR(heisenberg_mse_bound(1.0, 10), 0.014621636149762012, 1e-15);
  EXPECT_NEAR(heisenberg_mse_bound(2.0, 6) / heisenberg_mse_bound(2.0, 12), 4.0, 1e-12);
  EXPECT_NEAR(shotnoise_mse_bound(1.0, 10), 0.07310818074881006, 1e-15);
  EXPECT_NEAR(shotnoise_mse_bound(1.0, 1), 2 * kPi * kPi / 27, 1e-15);
  EXPECT_NEAR(shotnoise_mse_bound(3.0, 5) / shotnoise_mse_bound(3.0, 10), 2.0, 1e-12);
  EXPECT_THROW(heisenberg_mse_bound(0.0, 3), std::invalid_argument);
  EXPECT_THROW(shotnoise_mse_bound(1.0, 0), std::invalid_argument);
}

TEST(Entropic, Examples) {
  const double v = 2 * kPi;
  EXPECT_NEAR(entropic_region_bound(std::log(v), 1.0, v), v, 1e-12);
  EXPECT_NEAR(entropic_region_bound(conditional_entropy_covariant(ghz(5), v), 1.0, v), kPi, 1e-9);
  EXPECT_LT(entropic_region_bound(-50.0, 0.8, v), 1e-20);
  EXPECT_THROW(entropic_region_bound(1.0, 0.0, v), std::invalid_argument);
  EXPECT_NEAR(entropic_mse_bound_circle(0.0), 0.014067442439954782, 1e-15);
  EXPECT_NEAR(entropic_mse_bound_circle(std::log(v) - std::log(2.0)), kPi / (16 * std::sqrt(2.0)), 1e-12);
  EXPECT_LT(entropic_mse_bound_circle(0.1), entropic_mse_bound_circle(0.2));
}

TEST(Energy, Examples) {
  EXPECT_NEAR(energy_bounded_bound(0.0, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(energy_bounded_bound(10.0, 0.9), 0.008931634403332516, 1e-15);
  EXPECT_NEAR(energy_bounded_bound(1e6, 0.7) / energy_bounded_bound(2e6, 0.7), 2.0, 1e-5);
  EXPECT_LT(energy_bounded_bound(5.0, 0.9), energy_bounded_bound(4.0, 0.9));
  EXPECT_THROW(energy_bounded_bound(-1.0, 0.5), std::invalid_argument);
}

TEST(SeparableAnalytic, Examples) {
  EXPECT_NEAR(separable_analytic_bound(1, 1, 25, 0.9), 0.81 / (2 * (2 * std::sqrt(200.0) + 1)), 1e-15);
  EXPECT_NEAR(separable_analytic_bound(1, 1, 25, 0.9), 0.01383, 1e-5);
  EXPECT_LT(separable_analytic_bound(1, 1, 25, 1e-6), 1e-11);
  EXPECT_THROW(separable_analytic_bound(0.5, 1, 3, 0.5), std::invalid_argument);
}

TEST(SeparableAnalytic, FrozenTuples) {
  // Values from an independent re-derivation script.
  struct Tuple {
    long n;
    double alpha;
    long k;
    double m;
    double value;
  };
  const std::vector<Tuple> tuples{{166, 0.95, 4, 1, 1.298371356442057e-08},
                                  {38, 0.83, 1, 3, 0.0032614178732031465},
                                  {299, 0.105, 2, 1, 5.927642554606994e-08},
                                  {45, 0.462, 1, 2, 0.0013878986481617912},
                                  {47, 0.573, 1, 5, 0.0008422700895798534},
                                  {64, 0.95, 1, 5, 0.001985487396303394},
                                  {300, 0.427, 2, 1, 3.973400397723615e-06},
                                  {286, 0.866, 3, 4, 4.979517396095516e-09},
                                  {74, 0.564, 3, 5, 3.469445072568594e-09},
                                  {418, 0.698, 1, 5, 0.0004205303497532113}};
  for (const auto& t : tuples) EXPECT_NEAR(separable_analytic_bound(t.m, t.k, t.n, t.alpha), t.value, 1e-12 * t.value);
}

TEST(SeparableCertificate, Examples) {
  const std::vector<SiteAmplitudes> up{{1.0, 0.0}};
  const auto point = separable_certificate(up, 10, 0.7);
  EXPECT_NEAR(point.value, 0.7, 1e-15);
  EXPECT_EQ(point.window_count, 1u);

  const auto c = separable_certificate(plus_site(), 25, 0.9);
  EXPECT_NEAR(c.value, 0.07146797281073058, 1e-12);
  EXPECT_EQ(c.window_count, 8u);
  EXPECT_GE(c.value, separable_analytic_bound(1, 1, 25, 0.9));
  EXPECT_LE(c.value, 0.45);
}

TEST(SeparableCertificate, DominatesAnalyticAndIsValid) {
  for (long n : {4, 9, 16, 40, 100}) {
    for (double a : {0.5, 0.9}) {
      const auto c = separable_certificate(plus_site(), n, a);
      EXPECT_GE(c.value, separable_analytic_bound(1, 1, n, a)) << n;
      if (n <= 9) {
        EXPECT_LE(c.value, invariant_bound(plus_power(n), a).upper + 1e-9) << n;
      }
    }
  }
}

TEST(NonlinearExample, Examples) {
  const double h = 1 / std::sqrt(2.0);
  const std::vector<SiteAmplitudes> eig{{h, h}, {1.0, 0.0}};
  for (long n : {3, 12}) {
    EXPECT_NEAR(nonlinear_example_bound(eig, n, 0.9).value, separable_certificate(plus_site(), n, 0.9).value, 1e-12);
  }
  const std::vector<SiteAmplitudes> both{{h, h}, {h, h}};
  const auto one = nonlinear_example_bound(both, 1, 0.9);
  EXPECT_GT(one.value, 0.0);
  EXPECT_LE(one.value, 0.9);

  std::vector<std::pair<double, double>> pts;
  for (long n : {16, 24, 32, 48, 64}) pts.push_back({double(n), nonlinear_example_bound(both, n, 0.9).value});
  EXPECT_NEAR(scaling_exponent(pts).slope, -0.5, 0.15);

  const std::vector<SiteAmplitudes> three{{h, h}, {h, h}, {h, h}};
  EXPECT_THROW(nonlinear_example_bound(three, 5, 0.9), std::invalid_argument);
  const std::vector<SiteAmplitudes> bad{{h, h}, {1.0, 1.0}};
  EXPECT_THROW(nonlinear_example_bound(bad, 5, 0.9), std::invalid_argument);
}

TEST(AvgVolume, Examples) {
  const auto g = avg_volume_bounds(ghz(6), 0.9);
  EXPECT_NEAR(g.at_x, 0.45, 1e-9);
  EXPECT_NEAR(g.averaged, 0.45, 1e-9);
  EXPECT_NEAR(g.truncation, 0.45 * 0.225, 1e-6);

  const auto inv = ProbeState::from_amplitudes({0.0, 1.0, 0.0}, U1Generator({-1, 0, 1}), "invariant");
  EXPECT_NEAR(avg_volume_bounds(inv, 0.6).at_x, 0.6, 1e-9);
  EXPECT_THROW(avg_volume_bounds(ghz(2), 0.9, 0.95), std::invalid_argument);
}

TEST(AvgVolume, Ordering) {
  for (const auto& psi : {ghz(6), plus_power(6), sine_state(6), uniform_phase_state(6), optimal_probe_state(U1Generator({0, 2, 5}))}) {
    const auto b = avg_volume_bounds(psi, 0.9);
    const auto inv = invariant_bound(psi, 0.9);
    EXPECT_LE(b.truncation, b.averaged + 1e-6) << psi.label;
    EXPECT_LE(b.averaged, b.at_x + 1e-6) << psi.label;
    EXPECT_LE(b.at_x, inv.upper + 1e-6) << psi.label;
  }
}

TEST(DpiChain, BuiltinFamilies) {
  for (const auto& psi : {ghz(5), plus_power(5), sine_state(5), uniform_phase_state(5)}) {
    const auto avg = dephase(psi.state, psi.generator);
    for (double a : {0.3, 0.9}) EXPECT_GE(dpi_deficit(psi.state, avg.op(), a), -1e-7) << psi.label;
  }
}
