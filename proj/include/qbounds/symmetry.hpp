#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbounds/hypotest.hpp"
#include "qbounds/linalg.hpp"
#include "qbounds/numerics.hpp"
#include "qbounds/states.hpp"

namespace qbounds {

/// G-average of an observable: pinching onto the weight blocks.
inline HermitianOperator twirl(const HermitianOperator& e, const U1Generator& g) { return pinch(e, g); }

/// Operator norm of the twirl, computed block by block.
inline double twirl_norm(const HermitianOperator& e, const U1Generator& g) {
  if (e.dim() != g.dim()) throw std::invalid_argument("twirl_norm: dimension mismatch");
  double best = 0.0;
  for (const auto& block : g.blocks()) {
    if (block.size() == 1) {
      best = std::max(best, std::abs(e(block[0], block[0]).real()));
      continue;
    }
    ComplexMatrix b(block.size());
    for (std::size_t i = 0; i < block.size(); ++i)
      for (std::size_t j = 0; j < block.size(); ++j) b(i, j) = e(block[i], block[j]);
    best = std::max(best, operator_norm(HermitianOperator::symmetrized(b)));
  }
  return best;
}

/// Euclidean projection of v onto the probability simplex.
inline std::vector<double> project_to_simplex(std::span<const double> v) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / double(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

/// Block-diagonal state commuting with the generator.
struct InvariantState {
  std::vector<std::vector<std::size_t>> blocks;  // basis indices per weight value
  std::vector<ComplexMatrix> block_states;       // unit-trace PSD block (zero if the block is unused)
  std::vector<double> block_weights;             // probability of each block

  std::size_t dim() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
  }

  DensityMatrix assemble() const {
    ComplexMatrix m(dim());
    for (std::size_t k = 0; k < blocks.size(); ++k)
      for (std::size_t i = 0; i < blocks[k].size(); ++i)
        for (std::size_t j = 0; j < blocks[k].size(); ++j)
          m(blocks[k][i], blocks[k][j]) = block_weights[k] * block_states[k](i, j);
    return DensityMatrix::trusted(HermitianOperator::symmetrized(m));
  }

  /// Splits an invariant (block-diagonal) operator of unit trace into weights and normalized blocks.
  static InvariantState from_operator(const HermitianOperator& s, const U1Generator& g) {
    InvariantState out;
    out.blocks = g.blocks();
    for (const auto& block : out.blocks) {
      ComplexMatrix b(block.size());
      for (std::size_t i = 0; i < block.size(); ++i)
        for (std::size_t j = 0; j < block.size(); ++j) b(i, j) = s(block[i], block[j]);
      const double w = std::max(0.0, b.trace().real());
      if (w > 0.0) b *= cplx(1.0 / w);
      out.block_weights.push_back(w);
      out.block_states.push_back(std::move(b));
    }
    return out;
  }
};

struct BoundBracket {
  double lower = 0.0;
  double upper = 1.0;
  InvariantState sigma_cert;
  TestOperator test_cert;
  int iterations = 0;
  bool converged = false;
  bool fallback_used = false;  // lower came from the truncation certificate
};

enum class StepRule {
  diminishing,  // c / sqrt(k)
  polyak,       // (upper - f(sigma_k)) / ||g_k||^2, targeting the current best upper bound
};

struct InvariantBoundOptions {
  double tol = 1e-4;
  int max_iter = 5000;
  StepRule step_rule = StepRule::diminishing;
};

namespace detail {

// Dephased truncation of psi to the heaviest weight blocks with mass >= 1 - (alpha/2)^2.
inline HermitianOperator truncation_candidate(const ProbeState& psi, double alpha) {
  const auto blocks = psi.generator.blocks();
  const auto masses = weight_masses(psi.state, psi.generator);
  std::vector<std::size_t> order(blocks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return masses[a] > masses[b]; });
  const double target = 1.0 - 0.25 * alpha * alpha;
  std::vector<char> keep(psi.dim(), 0);
  double mass = 0.0;
  for (auto k : order) {
    if (mass >= target) break;
    mass += masses[k];
    for (auto i : blocks[k]) keep[i] = 1;
  }
  const auto p = basis_projector(psi.dim(), [&](std::size_t i) { return keep[i] != 0; });
  return pinch(truncate_to_projector(psi.state, p).state.op(), psi.generator);
}

}  // namespace detail

/// Two-sided bracket on sup over invariant states of beta_alpha(rho, sigma), which equals the minimum of
/// ||twirl(E)|| over feasible tests. Lower side: projected supergradient ascent; upper side: feasible tests.
inline BoundBracket invariant_bound(const ProbeState& psi, double alpha, const InvariantBoundOptions& opt = {}) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("invariant_bound: alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  const auto& g = psi.generator;
  const std::size_t n = psi.dim();
  const auto blocks = g.blocks();
  const bool fast = psi.is_pure_vector() && g.multiplicity_free();

  const double rho_norm = operator_norm(psi.state.op());
  const double c = 1.0 / (2.0 * rho_norm * double(n));

  BoundBracket out;
  double best_upper = std::numeric_limits<double>::infinity();
  double best_lower = -1.0;
  HermitianOperator best_sigma;
  HermitianOperator best_test;
  ComplexMatrix avg(n);
  double avg_weight = 0.0;

  struct Eval {
    double value;
    HermitianOperator test;
  };
  auto evaluate = [&](const HermitianOperator& sigma) -> Eval {
    if (fast) {
      std::vector<double> s(n);
      for (std::size_t i = 0; i < n; ++i) s[i] = std::max(0.0, sigma(i, i).real());
      auto r = beta_pure_diagonal(psi.amplitudes, s, alpha);
      return {r.value, r.test_operator()};
    }
    auto r = beta(psi.state, sigma, alpha);
    return {r.value, r.test.E};
  };
  auto consider_test = [&](const HermitianOperator& e) {
    const double u = twirl_norm(e, g);
    if (u < best_upper) {
      best_upper = u;
      best_test = e;
    }
  };
  auto consider_sigma = [&](const HermitianOperator& sigma, const Eval& ev) {
    if (ev.value > best_lower) {
      best_lower = ev.value;
      best_sigma = sigma;
    }
  };
  auto width_ok = [&] { return best_upper - best_lower <= opt.tol * std::max(best_upper, 1e-12); };

  // Truncation certificate (always valid) seeds the lower side.
  {
    const auto cand = detail::truncation_candidate(psi, alpha);
    const auto ev = evaluate(cand);
    consider_sigma(cand, ev);
    consider_test(ev.test);
  }
  const double fallback_value = best_lower;

  // Projection onto unit-trace block-diagonal PSD operators: joint simplex projection of block spectra.
  auto project = [&](const ComplexMatrix& m) {
    if (g.multiplicity_free()) {
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = m(i, i).real();
      return HermitianOperator::diagonal(project_to_simplex(d));
    }
    std::vector<EigenSystem> sys;
    std::vector<double> all;
    for (const auto& block : blocks) {
      ComplexMatrix b(block.size());
      for (std::size_t i = 0; i < block.size(); ++i)
        for (std::size_t j = 0; j < block.size(); ++j) b(i, j) = m(block[i], block[j]);
      sys.push_back(eigh(HermitianOperator::symmetrized(b)));
      all.insert(all.end(), sys.back().eigenvalues.begin(), sys.back().eigenvalues.end());
    }
    const auto proj = project_to_simplex(all);
    ComplexMatrix out(n);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      auto& es = sys[k];
      for (std::size_t t = 0; t < es.eigenvalues.size(); ++t) es.eigenvalues[t] = proj[offset + t];
      offset += es.eigenvalues.size();
      const auto b = spectral_map(es, [](double l) { return l; });
      for (std::size_t i = 0; i < blocks[k].size(); ++i)
        for (std::size_t j = 0; j < blocks[k].size(); ++j) out(blocks[k][i], blocks[k][j]) = b(i, j);
    }
    return HermitianOperator::symmetrized(out);
  };

  HermitianOperator sigma = pinch(psi.state.op(), g);
  int k = 0;
  for (; k < opt.max_iter; ++k) {
    const auto ev = evaluate(sigma);
    consider_sigma(sigma, ev);
    consider_test(ev.test);
    const double diminishing = c / std::sqrt(double(k + 1));
    avg += ev.test.matrix() * cplx(diminishing);
    avg_weight += diminishing;
    if (width_ok()) break;
    const auto grad = twirl(ev.test, g);
    double step = diminishing;
    if (opt.step_rule == StepRule::polyak) {
      const double g2 = grad.matrix().frobenius() * grad.matrix().frobenius();
      if (g2 > 0.0) step = (best_upper - ev.value) / g2;
    }
    sigma = project(sigma.matrix() + grad.matrix() * cplx(step));
  }
  out.iterations = k;

  // Averaged test, blended toward the identity until <rho, E> >= alpha.
  if (avg_weight > 0.0) {
    auto e = HermitianOperator::symmetrized(avg * cplx(1.0 / avg_weight));
    const double acc = pairing(psi.state.op(), e);
    if (acc < alpha) {
      const double s = std::clamp((alpha - acc) / (1.0 - acc), 0.0, 1.0);
      e = HermitianOperator::symmetrized(e.matrix() * cplx(1.0 - s) + ComplexMatrix::identity(n) * cplx(s));
    }
    consider_test(e);
  }

  out.lower = best_lower;
  out.upper = best_upper;
  out.sigma_cert = InvariantState::from_operator(best_sigma, g);
  out.test_cert = {best_test};
  out.converged = width_ok();
  out.fallback_used = best_lower == fallback_value;
  return out;
}

/// alpha / J for the uniform prior, J the number of distinct weights.
inline double universal_bound_u1(const U1Generator& g, double alpha) {
  detail::check_alpha(alpha);
  return alpha / double(g.distinct_count());
}

/// Equal superposition of one basis vector per distinct weight.
inline ProbeState optimal_probe_state(const U1Generator& g) {
  const auto blocks = g.blocks();
  std::vector<cplx> amps(g.dim(), 0.0);
  const double a = 1.0 / std::sqrt(double(blocks.size()));
  for (const auto& b : blocks) amps[b.front()] = a;
  return ProbeState::from_amplitudes(std::move(amps), g, "optimal-u1");
}

/// Lower bound on V_max / |X| for a nonuniform prior on an L-point phase grid: the maximum over
/// alpha' in (0, alpha^2 / 2) of beta_classical(prior, uniform, alpha - sqrt(2 alpha')) * lower(alpha') / alpha'.
inline double untwisted_prior_bound(const ProbeState& psi, std::span<const double> prior, double alpha,
                                    int grid = 16, const InvariantBoundOptions& opt = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("untwisted_prior_bound: alpha must lie in (0, 1)");
  if (prior.empty()) throw std::invalid_argument("untwisted_prior_bound: empty prior");
  if (grid < 1) throw std::invalid_argument("untwisted_prior_bound: empty alpha' grid");
  const double cap = 0.5 * alpha * alpha;
  const std::vector<double> uniform(prior.size(), 1.0 / double(prior.size()));
  double best = 0.0;
  for (int k = 1; k <= grid; ++k) {
    const double ap = cap * double(k) / double(grid + 1);
    const double a = std::max(0.0, alpha - std::sqrt(2.0 * ap));
    const double classical = beta_classical(prior, uniform, a).value;
    const double quantum = invariant_bound(psi, ap, opt).lower / ap;
    best = std::max(best, classical * quantum);
  }
  return best;
}

}  // namespace qbounds
