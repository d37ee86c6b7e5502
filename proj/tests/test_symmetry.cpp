#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace qbounds;

namespace {

ProbeState example_state() {
  return ProbeState::from_amplitudes({std::sqrt(0.9), std::sqrt(0.1)}, U1Generator({0, 1}), "example");
}

// Re-checks both certificates of a bracket independently of the solver.
void expect_bracket_valid(const ProbeState& psi, double alpha, const BoundBracket& b) {
  EXPECT_LE(b.lower, b.upper + 1e-9);
  const auto sigma = b.sigma_cert.assemble();
  EXPECT_NEAR(sigma.op().trace(), 1.0, 1e-9);
  EXPECT_GE(eigh(sigma.op()).eigenvalues.front(), -1e-9);
  EXPECT_LT((pinch(sigma.op(), psi.generator).matrix() - sigma.matrix()).max_abs(), 1e-12);
  EXPECT_NEAR(beta(psi.state, sigma.op(), alpha).value, b.lower, 1e-9);
  const auto& e = b.test_cert.E;
  EXPECT_TRUE(is_valid_test(e));
  EXPECT_GE(pairing(psi.state.op(), e), alpha - 1e-9);
  EXPECT_NEAR(operator_norm(twirl(e, psi.generator)), b.upper, 1e-9);
}

}  // namespace

TEST(Twirl, Examples) {
  const U1Generator g({0, 1});
  const auto plus = HermitianOperator::symmetrized(ComplexMatrix(2, {0.5, 0.5, 0.5, 0.5}));
  const auto t = twirl(plus, g);
  EXPECT_LT((t.matrix() - ComplexMatrix::diagonal(std::vector<double>{0.5, 0.5})).max_abs(), 1e-15);
  EXPECT_LT((twirl(HermitianOperator::identity(2), g).matrix() - ComplexMatrix::identity(2)).max_abs(), 1e-15);
  const auto diag = HermitianOperator::diagonal(std::vector<double>{0.3, 0.8});
  EXPECT_LT((twirl(diag, g).matrix() - diag.matrix()).max_abs(), 1e-15);
  EXPECT_THROW(twirl(diag, U1Generator({0, 1, 2})), std::invalid_argument);
}

TEST(Twirl, IdempotentUnitalTracePreserving) {
  std::mt19937_64 rng(113);
  const U1Generator g({1, 0, 1, 2, 0});
  for (int t = 0; t < 10; ++t) {
    const auto e = oracle::random_hermitian(5, rng);
    const auto once = twirl(e, g);
    EXPECT_LT((twirl(once, g).matrix() - once.matrix()).max_abs(), 1e-15);
    EXPECT_NEAR(once.trace(), e.trace(), 1e-12);
    EXPECT_NEAR(twirl_norm(e, g), operator_norm(once), 1e-10);
  }
}

TEST(Simplex, Projection) {
  const std::vector<double> inside{0.2, 0.3, 0.5};
  const auto p = project_to_simplex(inside);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p[i], inside[i], 1e-15);
  const auto q = project_to_simplex(std::vector<double>{2.0, 0.0});
  EXPECT_NEAR(q[0], 1.0, 1e-15);
  EXPECT_NEAR(q[1], 0.0, 1e-15);
  const auto r = project_to_simplex(std::vector<double>{0.0, 0.0, 0.0, 0.0});
  for (double x : r) EXPECT_NEAR(x, 0.25, 1e-15);

  std::mt19937_64 rng(127);
  std::normal_distribution<double> n;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> v(6);
    for (auto& x : v) x = n(rng);
    const auto w = project_to_simplex(v);
    double s = 0.0;
    for (double x : w) {
      EXPECT_GE(x, 0.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
    // Optimality: <v - w, y - w> <= 0 at the vertices y.
    for (std::size_t k = 0; k < v.size(); ++k) {
      double ip = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) ip += (v[i] - w[i]) * ((i == k ? 1.0 : 0.0) - w[i]);
      EXPECT_LE(ip, 1e-12);
    }
  }
}

TEST(InvariantBound, Ghz) {
  for (long n : {1, 2, 8, 32}) {
    const auto psi = ghz(n);
    const auto b = invariant_bound(psi, 0.9);
    EXPECT_LE(b.lower, 0.45 + 1e-9);
    EXPECT_GE(b.upper, 0.45 - 1e-9);
    EXPECT_LE(b.upper - b.lower, 1e-4 * b.upper);
    EXPECT_TRUE(b.converged);
    expect_bracket_valid(psi, 0.9, b);
  }
}

TEST(InvariantBound, ExampleStateAlphaOne) {
  const auto psi = example_state();
  const auto b = invariant_bound(psi, 1.0);
  EXPECT_GE(b.lower, 0.9 - 1e-3);
  EXPECT_LE(b.lower, 0.9 + 1e-9);
  const auto sigma = b.sigma_cert.assemble();
  const auto zero = DensityMatrix::pure(std::vector<cplx>{1.0, 0.0});
  EXPECT_LT(trace_distance(sigma, zero), 0.05);
  // The dephased state is strictly worse.
  EXPECT_LT(beta(psi.state, dephase(psi.state, psi.generator), 1.0).value, b.lower - 0.05);
  expect_bracket_valid(psi, 1.0, b);
}

TEST(InvariantBound, SinglePlusAlphaOne) {
  const auto psi = ProbeState::from_amplitudes({1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}, U1Generator({0, 1}), "plus1");
  const auto b = invariant_bound(psi, 1.0);
  EXPECT_NEAR(b.lower, 0.5, 1e-3);
  EXPECT_NEAR(b.upper, 0.5, 1e-3);
}

TEST(InvariantBound, UniformPhaseRange) {
  for (long n : {3, 10}) {
    const auto b = invariant_bound(uniform_phase_state(n), 0.9);
    EXPECT_GE(b.lower, 0.9 / double(n + 1) - 1e-9);
    EXPECT_LE(b.upper, 1.0);
  }
}

TEST(InvariantBound, MatchesSdpOracle) {
  // Minimax values from an independent conic solver.
  struct Case {
    ProbeState psi;
    double value;
  };
  const std::vector<Case> cases{{sine_state(4), 0.19385127827066698},
                                {sine_state(8), 0.11436108578395299},
                                {plus_power(4), 0.2042211006312383},
                                {plus_power(8), 0.14662933202684725}};
  for (const auto& c : cases) {
    const auto b = invariant_bound(c.psi, 0.9);
    EXPECT_LE(b.lower, c.value + 1e-6) << c.psi.label;
    EXPECT_GE(b.upper, c.value - 1e-6) << c.psi.label;
    EXPECT_LE(b.upper - b.lower, 0.01 * b.upper) << c.psi.label;
    expect_bracket_valid(c.psi, 0.9, b);
  }
}

TEST(InvariantBound, MinimaxGridSaturation) {
  std::mt19937_64 rng(131);
  for (int t = 0; t < 6; ++t) {
    const std::size_t n = 2 + t % 3;
    const auto amps = oracle::random_vector(n, rng);
    std::vector<long> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = long(i);
    const auto psi = ProbeState::from_amplitudes(amps, U1Generator(w), "random");
    const double a = t % 2 ? 0.9 : 0.5;
    const auto b = invariant_bound(psi, a);
    const double grid = oracle::grid_sup_beta(amps, a, n == 4 ? 40 : 80);
    EXPECT_LE(grid, b.upper + 1e-9);
    EXPECT_NEAR(b.lower, grid, 2e-3) << "t=" << t;
    expect_bracket_valid(psi, a, b);
  }
}

TEST(InvariantBound, MixedStateWithDegenerateWeights) {
  std::mt19937_64 rng(137);
  const auto rho = oracle::random_density(5, rng, 2);
  const ProbeState psi(rho, U1Generator({0, 1, 1, 2, 0}), "mixed");
  const auto b = invariant_bound(psi, 0.8);
  expect_bracket_valid(psi, 0.8, b);
  EXPECT_GE(b.lower, 0.8 / 3.0 - 1e-9 - 1.0);
  EXPECT_GT(b.lower, 0.0);
}

TEST(InvariantBound, MonotoneInAlpha) {
  const auto psi = sine_state(5);
  double prev = 0.0;
  for (double a : {0.2, 0.4, 0.6, 0.8, 1.0}) {
    const auto b = invariant_bound(psi, a);
    EXPECT_GE(b.upper + 1e-9, prev);
    prev = b.lower;
  }
}

TEST(InvariantBound, HalfMassTruncationFloor) {
  for (const auto& psi : {plus_power(12), sine_state(12), uniform_phase_state(6)}) {
    const double a = 0.9;
    const auto b = invariant_bound(psi, a);
    EXPECT_GE(b.lower, a / (2.0 * double(weight_support(psi))) - 1e-4);
  }
}

TEST(InvariantBound, PolyakStepRule) {
  InvariantBoundOptions opt;
  opt.step_rule = StepRule::polyak;
  const auto psi = sine_state(8);
  const auto b = invariant_bound(psi, 0.9, opt);
  expect_bracket_valid(psi, 0.9, b);
  EXPECT_LE(b.lower, 0.11436108578395299 + 1e-6);
  EXPECT_GE(b.upper, 0.11436108578395299 - 1e-6);
}

TEST(InvariantBound, Errors) {
  EXPECT_THROW(invariant_bound(ghz(2), 0.0), std::invalid_argument);
  EXPECT_THROW(invariant_bound(ghz(2), 1.5), std::invalid_argument);
}

TEST(UniversalBound, Examples) {
  EXPECT_NEAR(universal_bound_u1(U1Generator::qubit_symmetric(9), 0.9), 0.09, 1e-15);
  EXPECT_NEAR(universal_bound_u1(U1Generator({4, 4}), 0.7), 0.7, 1e-15);
  EXPECT_NEAR(universal_bound_u1(U1Generator({0, 1, 2}), 0.5), 1.0 / 6.0, 1e-15);
}

TEST(OptimalProbe, Examples) {
  const auto p = optimal_probe_state(U1Generator({-1, 1}));
  EXPECT_NEAR(std::abs(p.amplitudes[0]), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(p.label, "optimal-u1");
  const auto q = optimal_probe_state(U1Generator::qubit_symmetric(6));
  const auto u = uniform_phase_state(6);
  for (std::size_t i = 0; i < q.dim(); ++i) EXPECT_NEAR(std::abs(q.amplitudes[i] - u.amplitudes[i]), 0.0, 1e-15);
  for (long j : {2, 5, 11}) {
    std::vector<long> w(static_cast<std::size_t>(j));
    for (long i = 0; i < j; ++i) w[std::size_t(i)] = 3 * i;
    const U1Generator g(w);
    const auto b = invariant_bound(optimal_probe_state(g), 0.9);
    EXPECT_NEAR(b.lower, universal_bound_u1(g, 0.9), 1e-3 * universal_bound_u1(g, 0.9));
  }
}

TEST(UntwistedPrior, Consistency) {
  const auto psi = ghz(3);
  const std::vector<double> uniform(8, 1.0 / 8.0);
  const double u = untwisted_prior_bound(psi, uniform, 0.9, 8);
  EXPECT_GT(u, 0.0);
  EXPECT_LE(u, 0.45 + 1e-9);
  EXPECT_LE(u, invariant_bound(psi, 0.9).upper + 1e-9);

  std::vector<double> point(8, 0.0);
  point[3] = 1.0;
  const double v = untwisted_prior_bound(psi, point, 0.9, 8);
  EXPECT_GT(v, 0.0);
  EXPECT_LE(v, 1.0 / 8.0 + 1e-9);

  EXPECT_THROW(untwisted_prior_bound(psi, uniform, 1.0), std::invalid_argument);
  EXPECT_THROW(untwisted_prior_bound(psi, std::vector<double>{}, 0.5), std::invalid_argument);
  EXPECT_THROW(untwisted_prior_bound(psi, uniform, 0.5, 0), std::invalid_argument);
}
