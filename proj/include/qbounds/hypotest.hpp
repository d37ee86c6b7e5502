#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbounds/linalg.hpp"
#include "qbounds/numerics.hpp"
#include "qbounds/states.hpp"
#include "qbounds/tolerances.hpp"

namespace qbounds {

/// POVM element accepting the null hypothesis, 0 <= E <= 1.
struct TestOperator {
  HermitianOperator E;
};

/// Feasible point (mu, tau) of the dual program: mu >= 0, tau >= 0, tau >= mu rho - sigma.
struct DualCertificate {
  double mu = 0.0;
  HermitianOperator tau;
};

struct BetaResult {
  double alpha = 0.0;
  double value = 0.0;  // <sigma, E>
  TestOperator test;
  DualCertificate dual;
  double gap = 0.0;    // value - (alpha mu - tr tau)
};

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

// Spectral data of mu rho - sigma that the Neyman-Pearson scan needs.
struct Slice {
  double mu = 0.0;
  EigenSystem es;
  double bnd = 0.0;        // half-width of the boundary (zero) block
  double rho_pos = 0.0;    // <rho, P_{>0}>
  double rho_zero = 0.0;   // <rho, P_{=0}>
  double sigma_pos = 0.0;  // <sigma, P_{>0}>
  double sigma_zero = 0.0;
  double trace_pos = 0.0;  // tr {mu rho - sigma}_+

  double dual(double alpha) const { return alpha * mu - trace_pos; }
};

inline Slice slice_at(const DensityMatrix& rho, const HermitianOperator& sigma, double sigma_scale, double mu,
                      const Tolerances& tol) {
  Slice s;
  s.mu = mu;
  s.es = eigh(HermitianOperator::symmetrized(rho.matrix() * cplx(mu) - sigma.matrix()), tol);
  s.bnd = tol.boundary * std::max(1.0, mu + sigma_scale);
  for (std::size_t k = 0; k < s.es.eigenvalues.size(); ++k) {
    const double l = s.es.eigenvalues[k];
    if (l > 0.0) s.trace_pos += l;
    if (l < -s.bnd) continue;
    const double r = expectation_in_column(rho.op(), s.es.basis, k);
    const double g = expectation_in_column(sigma, s.es.basis, k);
    if (l > s.bnd) {
      s.rho_pos += r;
      s.sigma_pos += g;
    } else {
      s.rho_zero += r;
      s.sigma_zero += g;
    }
  }
  return s;
}

// c_pos P_{>0} + c_zero P_{=0} of a slice.
inline HermitianOperator slice_test(const Slice& s, double c_pos, double c_zero) {
  return spectral_map(s.es, [&](double l) { return l > s.bnd ? c_pos : (l >= -s.bnd ? c_zero : 0.0); });
}

inline HermitianOperator slice_tau(const Slice& s) {
  return spectral_map(s.es, [](double l) { return l > 0.0 ? l : 0.0; });
}

}  // namespace detail

/// Minimal type-II error <sigma, E> over tests with <rho, E> >= alpha, with a dual certificate.
/// sigma must be PSD but need not be normalized.
inline BetaResult beta(const DensityMatrix& rho, const HermitianOperator& sigma, double alpha,
                       const Tolerances& tol = kTol) {
  detail::check_alpha(alpha);
  if (rho.dim() != sigma.dim()) {
    throw std::invalid_argument("beta: dimension mismatch " + std::to_string(rho.dim()) + " vs " +
                                std::to_string(sigma.dim()));
  }
  const std::size_t n = rho.dim();
  const auto sigma_es = eigh(sigma, tol);
  const double sigma_scale = std::max(0.0, sigma.trace());
  if (sigma_es.eigenvalues.front() < -tol.psd * std::max(1.0, sigma_scale)) {
    throw std::invalid_argument("beta: alternative hypothesis is not positive semidefinite");
  }

  BetaResult out;
  out.alpha = alpha;
  if (alpha == 0.0) {
    out.test.E = HermitianOperator::symmetrized(ComplexMatrix(n));
    out.dual = {0.0, HermitianOperator::symmetrized(ComplexMatrix(n))};
    return out;
  }

  auto finish_exact = [&](const detail::Slice& s) {
    const double gamma = s.rho_zero > 0.0 ? std::clamp((alpha - s.rho_pos) / s.rho_zero, 0.0, 1.0) : 0.0;
    out.test.E = detail::slice_test(s, 1.0, gamma);
    out.value = s.sigma_pos + gamma * s.sigma_zero;
    out.dual = {s.mu, detail::slice_tau(s)};
    out.gap = out.value - s.dual(alpha);
    return out;
  };
  auto contains = [&](const detail::Slice& s) {
    return s.rho_pos <= alpha + 1e-15 && alpha <= s.rho_pos + s.rho_zero + 1e-15;
  };

  // The infimum at alpha = 1 is <sigma, support projector of rho>; the dual optimum may only be approached.
  if (alpha == 1.0) {
    const auto rho_es = eigh(rho.op(), tol);
    const HermitianOperator support = spectral_map(rho_es, [&](double l) { return l > tol.support ? 1.0 : 0.0; });
    out.test.E = support;
    out.value = pairing(sigma, support);
    double mu = 1.0;
    detail::Slice best = detail::slice_at(rho, sigma, sigma_scale, 0.0, tol);
    for (int k = 0; k < 80 && mu < 1e9 * std::max(1.0, sigma_scale); ++k, mu *= 2.0) {
      auto s = detail::slice_at(rho, sigma, sigma_scale, mu, tol);
      if (s.dual(alpha) > best.dual(alpha)) best = std::move(s);
      if (out.value - best.dual(alpha) <= 0.1 * tol.duality_gap) break;
    }
    out.dual = {best.mu, detail::slice_tau(best)};
    out.gap = out.value - best.dual(alpha);
    return out;
  }

  auto lo = detail::slice_at(rho, sigma, sigma_scale, 0.0, tol);
  if (contains(lo)) return finish_exact(lo);

  double mu_hi = 1.0;
  auto hi = detail::slice_at(rho, sigma, sigma_scale, mu_hi, tol);
  while (hi.rho_pos + hi.rho_zero < alpha) {
    lo = std::move(hi);
    mu_hi *= 2.0;
    if (mu_hi > 1e15) throw std::runtime_error("beta: failed to bracket the optimal slope");
    hi = detail::slice_at(rho, sigma, sigma_scale, mu_hi, tol);
  }
  if (contains(hi)) return finish_exact(hi);

  // Invariant: <rho, P_{>=0}(lo)> < alpha < <rho, P_{>0}(hi)>.
  auto mixed_gap = [&](const detail::Slice& a, const detail::Slice& b, double& t, double& value) {
    const double a_lo = a.rho_pos + a.rho_zero;
    const double a_hi = b.rho_pos;
    t = std::clamp((alpha - a_lo) / (a_hi - a_lo), 0.0, 1.0);
    value = (1.0 - t) * (a.sigma_pos + a.sigma_zero) + t * b.sigma_pos;
    return value - std::max(a.dual(alpha), b.dual(alpha));
  };
  double t = 0.0, value = 0.0;
  double gap = mixed_gap(lo, hi, t, value);
  for (int step = 0; step < tol.bisection_max_steps && gap > 0.1 * tol.duality_gap; ++step) {
    const double mid = 0.5 * (lo.mu + hi.mu);
    if (!(mid > lo.mu && mid < hi.mu)) break;
    auto s = detail::slice_at(rho, sigma, sigma_scale, mid, tol);
    if (contains(s)) return finish_exact(s);
    if (s.rho_pos + s.rho_zero < alpha)
      lo = std::move(s);
    else
      hi = std::move(s);
    gap = mixed_gap(lo, hi, t, value);
  }

  out.test.E = detail::slice_test(lo, 1.0 - t, 1.0 - t) + detail::slice_test(hi, t, 0.0);
  out.value = value;
  const auto& best = lo.dual(alpha) >= hi.dual(alpha) ? lo : hi;
  out.dual = {best.mu, detail::slice_tau(best)};
  out.gap = out.value - best.dual(alpha);
  return out;
}

inline BetaResult beta(const DensityMatrix& rho, const DensityMatrix& sigma, double alpha,
                       const Tolerances& tol = kTol) {
  return beta(rho, sigma.op(), alpha, tol);
}

/// Checks 0 <= E <= 1 within tolerance.
inline bool is_valid_test(const HermitianOperator& e, const Tolerances& tol = kTol) {
  const auto ev = eigh(e).eigenvalues;
  return ev.front() >= -tol.test_bounds && ev.back() <= 1.0 + tol.test_bounds;
}

/// Checks tau >= 0 and tau >= mu rho - sigma, with the slack scaled by max(1, mu).
inline bool is_valid_dual(const DualCertificate& d, const DensityMatrix& rho, const HermitianOperator& sigma,
                          double slack = 1e-8) {
  if (d.mu < 0.0) return false;
  const double s = slack * std::max(1.0, d.mu);
  if (eigh(d.tau).eigenvalues.front() < -s) return false;
  const auto diff = HermitianOperator::symmetrized(d.tau.matrix() - rho.matrix() * cplx(d.mu) + sigma.matrix());
  return eigh(diff).eigenvalues.front() >= -s;
}

struct ClassicalBeta {
  double value = 0.0;
  std::vector<double> test;
};

/// Classical Neyman-Pearson: minimize sum q_i E_i subject to sum p_i E_i >= alpha, 0 <= E_i <= 1.
inline ClassicalBeta beta_classical(std::span<const double> p, std::span<const double> q, double alpha) {
  detail::check_alpha(alpha);
  if (p.size() != q.size()) throw std::invalid_argument("beta_classical: length mismatch");
  double total = 0.0;
  for (double x : p) {
    if (x < 0.0) throw std::invalid_argument("beta_classical: negative probability");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("beta_classical: p does not sum to 1");
  for (double x : q)
    if (x < 0.0) throw std::invalid_argument("beta_classical: q must be nonnegative");

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) order.push_back(i);
  // Descending likelihood ratio p/q, compared as p_i q_j > p_j q_i so q = 0 ranks first.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return p[i] * q[j] > p[j] * q[i]; });

  ClassicalBeta out;
  out.test.assign(p.size(), 0.0);
  double mass = 0.0;
  for (std::size_t i : order) {
    if (mass >= alpha) break;
    const double need = alpha - mass;
    const double e = need >= p[i] ? 1.0 : need / p[i];
    out.test[i] = e;
    mass += e * p[i];
    out.value += e * q[i];
  }
  return out;
}

/// beta for rho = |psi><psi| against a diagonal sigma = diag(s), s >= 0.
/// mu rho - sigma has at most one positive eigenvalue lambda, fixed by the secular equation
/// mu sum_i |psi_i|^2 / (lambda + s_i) = 1, with eigenvector v_i ~ psi_i / (lambda + s_i).
struct PureDiagonalBeta {
  double alpha = 0.0;
  double value = 0.0;
  double mu = 0.0;
  double lambda = 0.0;             // positive eigenvalue of mu rho - sigma (0 if none)
  std::vector<cplx> vector;        // normalized v; empty if the test is supported on ker(sigma) only
  std::vector<cplx> dual_vector;   // eigenvector carrying tau when it differs from v
  double weight = 0.0;             // E = weight |v><v| + zero_weight * P_ker
  double zero_weight = 0.0;
  std::vector<char> kernel;        // indices with s_i = 0
  std::vector<double> test_diag;   // diagonal of E
  double gap = 0.0;

  HermitianOperator test_operator() const {
    const std::size_t n = test_diag.size();
    ComplexMatrix e(n);
    if (!vector.empty()) e = ComplexMatrix::outer(vector) * cplx(weight);
    for (std::size_t i = 0; i < n; ++i)
      if (kernel[i]) e(i, i) += zero_weight;
    return HermitianOperator::symmetrized(e);
  }

  HermitianOperator tau() const {
    const std::size_t n = test_diag.size();
    const auto& u = dual_vector.empty() ? vector : dual_vector;
    if (u.empty() || lambda == 0.0) return HermitianOperator::symmetrized(ComplexMatrix(n));
    return HermitianOperator::symmetrized(ComplexMatrix::outer(u) * cplx(lambda));
  }

  BetaResult to_result() const {
    BetaResult r;
    r.alpha = alpha;
    r.value = value;
    r.test.E = test_operator();
    r.dual = {mu, tau()};
    r.gap = gap;
    return r;
  }
};

inline PureDiagonalBeta beta_pure_diagonal(std::span<const cplx> amplitudes, std::span<const double> s, double alpha) {
  detail::check_alpha(alpha);
  const std::size_t n = amplitudes.size();
  if (s.size() != n) throw std::invalid_argument("beta_pure_diagonal: dimension mismatch");
  PureDiagonalBeta out;
  out.alpha = alpha;
  out.kernel.assign(n, 0);
  out.test_diag.assign(n, 0.0);

  std::vector<double> w(n);
  double smax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (s[i] < 0.0) throw std::invalid_argument("beta_pure_diagonal: negative diagonal entry");
    w[i] = std::norm(amplitudes[i]);
    smax = std::max(smax, s[i]);
  }
  double w_zero = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (s[i] == 0.0) {
      out.kernel[i] = 1;
      w_zero += w[i];
    }

  // Supported on ker(sigma): zero type-II error.
  if (alpha <= w_zero) {
    out.zero_weight = w_zero > 0.0 ? alpha / w_zero : 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (out.kernel[i]) out.test_diag[i] = out.zero_weight;
    return out;
  }

  auto fill_vector = [&](double lambda, double weight) {
    double s2 = 0.0;
    out.vector.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] == 0.0) continue;
      out.vector[i] = amplitudes[i] / (lambda + s[i]);
      s2 += std::norm(out.vector[i]);
    }
    const double norm = std::sqrt(s2);
    for (std::size_t i = 0; i < n; ++i) {
      out.vector[i] /= norm;
      out.test_diag[i] = weight * std::norm(out.vector[i]);
    }
    out.weight = weight;
  };

  if (alpha == 1.0) {
    // E = |psi><psi|; the dual optimum is approached as lambda -> infinity with gap Var_w(s) / lambda.
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m1 += w[i] * s[i];
      m2 += w[i] * s[i] * s[i];
    }
    out.vector.assign(amplitudes.begin(), amplitudes.end());
    out.weight = 1.0;
    for (std::size_t i = 0; i < n; ++i) out.test_diag[i] = w[i];
    out.value = m1;
    const double var = std::max(0.0, m2 - m1 * m1);
    if (var == 0.0) {
      // sigma acts as m1 on supp(psi): mu = m1 with tau = 0 on the relevant part.
      out.mu = m1;
      out.lambda = 0.0;
      out.gap = 0.0;
      return out;
    }
    const double lambda = std::max(1.0, var * 1e10);
    double S = 0.0, Ts = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      S += w[i] / (lambda + s[i]);
      Ts += w[i] * s[i] / (lambda + s[i]);
    }
    out.mu = 1.0 / S;
    out.lambda = lambda;
    // alpha mu - lambda = (1 - lambda S) / S = Ts / S, evaluated without cancellation.
    out.gap = out.value - Ts / S;
    // tau = lambda |u><u| with u the positive eigenvector at this lambda.
    std::vector<cplx> u(n);
    double s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = amplitudes[i] / (lambda + s[i]);
      s2 += std::norm(u[i]);
    }
    for (auto& x : u) x /= std::sqrt(s2);
    out.dual_vector = std::move(u);
    return out;
  }

  auto sums = [&](double lambda, double& S, double& S2, double& V) {
    S = S2 = V = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = lambda + s[i];
      S += w[i] / d;
      S2 += w[i] / (d * d);
      V += w[i] * s[i] / (d * d);
    }
  };

  if (w_zero == 0.0) {
    // At the threshold slope mu0 = 1 / sum w/s the top eigenvalue is zero with eigenvector v ~ psi / s.
    double S0 = 0.0, S20 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] == 0.0) continue;
      S0 += w[i] / s[i];
      S20 += w[i] / (s[i] * s[i]);
    }
    const double overlap0 = S0 * S0 / S20;
    if (alpha <= overlap0) {
      fill_vector(0.0, alpha / overlap0);
      out.mu = 1.0 / S0;
      out.lambda = 0.0;
      out.value = alpha / S0;
      out.gap = 0.0;
      return out;
    }
  }

  auto overlap = [&](double lambda) {
    double S, S2, V;
    sums(lambda, S, S2, V);
    return S * S / S2;
  };

  double lo = 0.0;
  double hi = std::max(1.0, smax);
  while (overlap(hi) < alpha) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("beta_pure_diagonal: failed to bracket lambda");
  }
  if (lo == 0.0) {
    lo = hi;
    while (lo > 1e-300 && overlap(lo) >= alpha) lo *= 0.5;
  }
  for (int step = 0; step < 400; ++step) {
    const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
    const double m = (hi / lo < 4.0 || lo == 0.0) ? 0.5 * (lo + hi) : mid;
    if (!(m > lo && m < hi)) break;
    if (overlap(m) >= alpha)
      hi = m;
    else
      lo = m;
  }

  const double lambda = hi;
  double S, S2, V;
  sums(lambda, S, S2, V);
  fill_vector(lambda, 1.0);
  out.lambda = lambda;
  out.mu = 1.0 / S;
  out.value = V / S2;
  const double ov = S * S / S2;
  // gap = mu (overlap - alpha) for the projector test at this lambda.
  out.gap = out.mu * (ov - alpha);
  return out;
}

/// H(X|B) for a U(1)-covariant family with uniform prior over a parameter space of the given volume.
inline double conditional_entropy_covariant(const ProbeState& psi, double volume) {
  if (!(volume > 0.0)) throw std::invalid_argument("conditional_entropy_covariant: volume must be positive");
  return std::log(volume) + von_neumann_entropy(psi.state) -
         von_neumann_entropy(dephase(psi.state, psi.generator));
}

/// D(rho || sigma) - [d(alpha || beta_alpha / |sigma|) - log |sigma|]; nonnegative by data processing.
inline double dpi_deficit(const DensityMatrix& rho, const HermitianOperator& sigma, double alpha) {
  const double norm = sigma.trace();
  if (!(norm > 0.0)) throw std::invalid_argument("dpi_deficit: sigma must have positive trace");
  const double d = relative_entropy(rho, sigma);
  if (std::isinf(d)) return std::numeric_limits<double>::infinity();
  const double b = beta(rho, sigma, alpha).value;
  const double q = std::clamp(b / norm, 0.0, 1.0);
  return d - (binary_relative_entropy(alpha, q) - std::log(norm));
}

}  // namespace qbounds
