#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qbounds/linalg.hpp"
#include "qbounds/numerics.hpp"

namespace qbounds {

/// Integer weights of a diagonal U(1) generator, one per basis vector.
class U1Generator {
 public:
  U1Generator() = default;
  explicit U1Generator(std::vector<long> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw std::invalid_argument("U1Generator: need at least one weight");
  }

  /// Weights 2m - N for m = 0..N: N qubits with H = sigma_z on each, symmetric subspace.
  static U1Generator qubit_symmetric(long n) {
    std::vector<long> w(static_cast<std::size_t>(n + 1));
    for (long m = 0; m <= n; ++m) w[static_cast<std::size_t>(m)] = 2 * m - n;
    return U1Generator(std::move(w));
  }

  std::size_t dim() const noexcept { return weights_.size(); }
  std::span<const long> weights() const noexcept { return weights_; }
  long operator[](std::size_t i) const noexcept { return weights_[i]; }

  /// Basis indices grouped by weight value, in ascending weight order.
  std::vector<std::vector<std::size_t>> blocks() const {
    std::map<long, std::vector<std::size_t>> by_weight;
    for (std::size_t i = 0; i < weights_.size(); ++i) by_weight[weights_[i]].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    out.reserve(by_weight.size());
    for (auto& [w, idx] : by_weight) out.push_back(std::move(idx));
    return out;
  }

  /// Number of distinct weights (J).
  std::size_t distinct_count() const { return blocks().size(); }

  bool multiplicity_free() const { return distinct_count() == dim(); }

 private:
  std::vector<long> weights_;
};

struct ProbeState {
  DensityMatrix state;
  U1Generator generator;
  std::string label;
  // Amplitudes when the state is pure and was built from a vector; empty otherwise.
  std::vector<cplx> amplitudes;

  ProbeState() = default;
  ProbeState(DensityMatrix s, U1Generator g, std::string l, std::vector<cplx> amps = {})
      : state(std::move(s)), generator(std::move(g)), label(std::move(l)), amplitudes(std::move(amps)) {
    if (state.dim() != generator.dim()) {
      throw std::invalid_argument("ProbeState: state dimension " + std::to_string(state.dim()) +
                                  " does not match generator dimension " + std::to_string(generator.dim()));
    }
  }

  static ProbeState from_amplitudes(std::vector<cplx> amps, U1Generator g, std::string label) {
    auto rho = DensityMatrix::pure(amps);
    return ProbeState(std::move(rho), std::move(g), std::move(label), std::move(amps));
  }

  std::size_t dim() const noexcept { return state.dim(); }
  bool is_pure_vector() const noexcept { return !amplitudes.empty(); }
};

namespace detail {

inline void require_positive(long n, const char* who) {
  if (n < 1) throw std::invalid_argument(std::string(who) + ": N must be >= 1");
}

inline std::vector<cplx> real_amplitudes(const std::vector<double>& a) {
  return std::vector<cplx>(a.begin(), a.end());
}

}  // namespace detail

inline ProbeState ghz(long n) {
  detail::require_positive(n, "ghz");
  const double a = 1.0 / std::sqrt(2.0);
  return ProbeState::from_amplitudes({a, a}, U1Generator({-n, n}), "ghz");
}

/// |+>^N in the symmetric weight basis: amplitude sqrt(binom(N, m) / 2^N) on m = 0..N.
inline ProbeState plus_power(long n) {
  detail::require_positive(n, "plus_power");
  std::vector<double> amps(static_cast<std::size_t>(n + 1));
  for (long m = 0; m <= n; ++m) {
    const double log_binom = std::lgamma(double(n) + 1) - std::lgamma(double(m) + 1) - std::lgamma(double(n - m) + 1);
    amps[static_cast<std::size_t>(m)] = std::exp(0.5 * (log_binom - double(n) * std::log(2.0)));
  }
  // Renormalize away lgamma rounding.
  double s = 0.0;
  for (double a : amps) s += a * a;
  for (double& a : amps) a /= std::sqrt(s);
  return ProbeState::from_amplitudes(detail::real_amplitudes(amps), U1Generator::qubit_symmetric(n), "plus");
}

inline ProbeState sine_state(long n) {
  detail::require_positive(n, "sine_state");
  std::vector<double> amps(static_cast<std::size_t>(n + 1));
  const double pref = std::sqrt(2.0 / double(n + 2));
  for (long m = 0; m <= n; ++m)
    amps[static_cast<std::size_t>(m)] = pref * std::sin(double(m + 1) * std::numbers::pi / double(n + 2));
  return ProbeState::from_amplitudes(detail::real_amplitudes(amps), U1Generator::qubit_symmetric(n), "sine");
}

inline ProbeState uniform_phase_state(long n) {
  detail::require_positive(n, "uniform_phase_state");
  std::vector<double> amps(static_cast<std::size_t>(n + 1), 1.0 / std::sqrt(double(n + 1)));
  return ProbeState::from_amplitudes(detail::real_amplitudes(amps), U1Generator::qubit_symmetric(n), "uniform");
}

using SiteAmplitudes = std::pair<cplx, cplx>;  // (weight -1, weight +1)

/// Weight distribution over m = 0..N (weight 2m - N) of a qubit product state.
/// `sites` holds either one pair (used for every site) or exactly N pairs.
inline std::vector<double> product_weight_distribution(std::span<const SiteAmplitudes> sites, long n,
                                                       const Tolerances& tol = kTol) {
  detail::require_positive(n, "product_state");
  if (sites.size() != 1 && sites.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("product_state: expected 1 or N site amplitude pairs, got " +
                                std::to_string(sites.size()));
  }
  std::vector<double> p{1.0};
  for (long k = 0; k < n; ++k) {
    const auto& [a, b] = sites[sites.size() == 1 ? 0 : static_cast<std::size_t>(k)];
    const double pa = std::norm(a);
    const double pb = std::norm(b);
    if (std::abs(pa + pb - 1.0) > tol.site_norm) {
      throw std::invalid_argument("product_state: site " + std::to_string(k) + " is not normalized");
    }
    std::vector<double> next(p.size() + 1, 0.0);
    for (std::size_t m = 0; m < p.size(); ++m) {
      next[m] += p[m] * pa;
      next[m + 1] += p[m] * pb;
    }
    p = std::move(next);
  }
  return p;
}

/// Pure qubit product state, stored as its induced weight distribution: amplitude sqrt(p_m) on weight 2m - N.
/// Within each weight eigenspace only the norm of the component matters for U(1)-invariant quantities.
inline ProbeState product_state(std::span<const SiteAmplitudes> sites, long n) {
  const auto p = product_weight_distribution(sites, n);
  std::vector<cplx> amps(p.size());
  for (std::size_t m = 0; m < p.size(); ++m) amps[m] = std::sqrt(p[m]);
  double s = 0.0;
  for (double x : p) s += x;
  for (auto& a : amps) a /= std::sqrt(s);
  return ProbeState::from_amplitudes(std::move(amps), U1Generator::qubit_symmetric(n), "product");
}

/// Pinching onto the weight eigenspaces of g.
inline HermitianOperator pinch(const HermitianOperator& a, const U1Generator& g) {
  if (a.dim() != g.dim()) {
    throw std::invalid_argument("pinch: operator dimension " + std::to_string(a.dim()) +
                                " does not match generator dimension " + std::to_string(g.dim()));
  }
  ComplexMatrix out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (g[i] == g[j]) out(i, j) = a(i, j);
  return HermitianOperator::symmetrized(out);
}

inline DensityMatrix dephase(const DensityMatrix& rho, const U1Generator& g) {
  return DensityMatrix::trusted(pinch(rho.op(), g));
}

/// Probability mass of the state on each distinct weight (ascending weight order).
inline std::vector<double> weight_masses(const DensityMatrix& rho, const U1Generator& g) {
  std::vector<double> out;
  for (const auto& block : g.blocks()) {
    double m = 0.0;
    for (auto i : block) m += rho(i, i).real();
    out.push_back(m);
  }
  return out;
}

inline std::size_t weight_support(const ProbeState& psi, double mass_tol = 1e-12) {
  std::size_t count = 0;
  for (double m : weight_masses(psi.state, psi.generator))
    if (m > mass_tol) ++count;
  return count;
}

struct Truncation {
  DensityMatrix state;
  double overlap = 0.0;  // <rho, P>
};

/// P rho P / <rho, P> for a projector P.
inline Truncation truncate_to_projector(const DensityMatrix& rho, const HermitianOperator& p,
                                        const Tolerances& tol = kTol) {
  if (rho.dim() != p.dim()) throw std::invalid_argument("truncate_to_projector: dimension mismatch");
  const ComplexMatrix& pm = p.matrix();
  const ComplexMatrix p2 = pm * pm;
  if ((p2 - pm).max_abs() > tol.projector) throw std::invalid_argument("truncate_to_projector: P is not idempotent");
  const double overlap = pairing(rho.op(), p);
  if (overlap <= 0.0) throw std::invalid_argument("truncate_to_projector: state has zero overlap with P");
  ComplexMatrix t = pm * rho.matrix() * pm;
  t *= cplx(1.0 / overlap);
  return {DensityMatrix::trusted(HermitianOperator::symmetrized(t)), overlap};
}

/// Diagonal projector onto the basis vectors whose index satisfies `keep`.
template <typename Pred>
HermitianOperator basis_projector(std::size_t dim, Pred&& keep) {
  std::vector<double> d(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) d[i] = keep(i) ? 1.0 : 0.0;
  return HermitianOperator::diagonal(d);
}

}  // namespace qbounds
