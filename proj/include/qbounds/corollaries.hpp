#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbounds/hypotest.hpp"
#include "qbounds/numerics.hpp"
#include "qbounds/states.hpp"
#include "qbounds/symmetry.hpp"

namespace qbounds {

/// Ball-volume function of a parameter space together with a point-estimator error.
struct MseBoundInput {
  double delta = 0.0;      // ball radius
  double mse = 0.0;        // mean-square error
  double volume_X = 2.0 * std::numbers::pi;
  std::function<double(double)> ball_growth;  // b_X(delta)
};

/// Arc-length balls on the circle.
inline double circle_ball_growth(double delta) { return std::min(2.0 * delta, 2.0 * std::numbers::pi); }

struct RegionSuccess {
  double p_succ_lb = 0.0;
  std::string note;
};

/// Chebyshev: a point estimator with the given MSE lands within delta with probability >= 1 - mse / delta^2.
inline RegionSuccess point_to_region(double mse, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("point_to_region: delta must be positive");
  if (mse < 0.0) throw std::invalid_argument("point_to_region: mse must be nonnegative");
  const double raw = 1.0 - mse / (delta * delta);
  RegionSuccess r{std::clamp(raw, 0.0, 1.0), ""};
  if (raw < 0.0) r.note = "clipped at 0";
  return r;
}

inline RegionSuccess point_to_region(const MseBoundInput& in) {
  if (in.ball_growth && in.ball_growth(in.delta) > in.volume_X * (1.0 + 1e-12)) {
    throw std::invalid_argument("point_to_region: ball volume exceeds |X|");
  }
  return point_to_region(in.mse, in.delta);
}

inline double heisenberg_mse_bound(double c, long n) {
  if (!(c > 0.0) || n < 1) throw std::invalid_argument("heisenberg_mse_bound: need C > 0 and N >= 1");
  const double pi = std::numbers::pi;
  return 4.0 * c * c * pi * pi / (27.0 * double(n) * double(n));
}

inline double shotnoise_mse_bound(double d, long n) {
  if (!(d > 0.0) || n < 1) throw std::invalid_argument("shotnoise_mse_bound: need D > 0 and N >= 1");
  const double pi = std::numbers::pi;
  return 2.0 * d * d * pi * pi / (27.0 * double(n));
}

/// Lower bound on the average region volume from h(p) + p log V + (1 - p) log |X| >= H(X|B).
inline double entropic_region_bound(double h_cond, double p_succ, double volume_X) {
  if (!(p_succ > 0.0 && p_succ <= 1.0)) throw std::invalid_argument("entropic_region_bound: p_succ must lie in (0, 1]");
  if (!(volume_X > 0.0)) throw std::invalid_argument("entropic_region_bound: volume must be positive");
  return std::exp((h_cond - binary_entropy(p_succ) - (1.0 - p_succ) * std::log(volume_X)) / p_succ);
}

/// Lower bound on the root-mean-square error of a circle-valued point estimator.
inline double entropic_mse_bound_circle(double h_cond) {
  return std::exp(2.0 * h_cond) / (16.0 * std::numbers::sqrt2 * std::numbers::pi);
}

/// V_max / 2 pi for phase estimation with mean photon number at most E.
inline double energy_bounded_bound(double energy, double p_succ) {
  if (energy < 0.0) throw std::invalid_argument("energy_bounded_bound: E must be nonnegative");
  if (!(p_succ > 0.0 && p_succ <= 1.0)) throw std::invalid_argument("energy_bounded_bound: p_succ must lie in (0, 1]");
  return p_succ * p_succ * p_succ / (8.0 * energy + 2.0 * p_succ * p_succ);
}

/// Generic product-state bound alpha^{k+1} / (2 (2 sqrt(8N) M + 1)^k).
inline double separable_analytic_bound(double m, long k, long n, double alpha) {
  if (!(m >= 1.0) || k < 1 || n < 1) throw std::invalid_argument("separable_analytic_bound: need M >= 1, k >= 1, N >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("separable_analytic_bound: alpha must lie in (0, 1]");
  return std::pow(alpha, double(k + 1)) / (2.0 * std::pow(2.0 * std::sqrt(8.0 * double(n)) * m + 1.0, double(k)));
}

struct WindowCertificate {
  double value = 0.0;
  bool feasible = false;
  std::size_t window_count = 0;  // distinct weights in the best window
  double mass = 0.0;             // probability inside the best window
  double delta = 0.0;            // sqrt(1 - mass)
};

/// max over windows centered on the mean weight of (alpha - sqrt(1 - q)) / J', where q is the window mass and
/// J' the number of distinct weights it contains; only windows with sqrt(1 - q) < alpha count.
inline WindowCertificate window_certificate(const std::map<long, double>& masses, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("window_certificate: alpha must lie in (0, 1]");
  double mean = 0.0;
  for (const auto& [w, p] : masses) mean += double(w) * p;
  std::vector<std::pair<double, double>> by_distance;  // (|w - mean|, mass)
  for (const auto& [w, p] : masses) by_distance.push_back({std::abs(double(w) - mean), p});
  std::stable_sort(by_distance.begin(), by_distance.end(), [](auto a, auto b) { return a.first < b.first; });

  WindowCertificate best;
  double q = 0.0;
  for (std::size_t i = 0; i < by_distance.size(); ++i) {
    q += by_distance[i].second;
    // Weights at the same distance enter the window together.
    if (i + 1 < by_distance.size() && by_distance[i + 1].first == by_distance[i].first) continue;
    const double delta = std::sqrt(std::max(0.0, 1.0 - q));
    if (!(delta < alpha)) continue;
    const double v = (alpha - delta) / double(i + 1);
    if (v > best.value) best = {v, true, i + 1, q, delta};
  }
  return best;
}

/// Constructive lower bound on the invariant bound for a qubit product state (truncate, smooth, pinch).
inline WindowCertificate separable_certificate(std::span<const SiteAmplitudes> sites, long n, double alpha) {
  const auto p = product_weight_distribution(sites, n);
  std::map<long, double> masses;
  for (std::size_t m = 0; m < p.size(); ++m) masses[2 * long(m) - n] += p[m];
  return window_certificate(masses, alpha);
}

/// Same certificate for N probe qubits and one auxiliary qubit under the generator J_z (x) sigma_z.
/// `sites` holds (probe, aux), or N probe pairs followed by the aux pair.
inline WindowCertificate nonlinear_example_bound(std::span<const SiteAmplitudes> sites, long n, double alpha) {
  if (n < 1) throw std::invalid_argument("nonlinear_example_bound: N must be >= 1");
  std::span<const SiteAmplitudes> probes;
  if (sites.size() == 2) {
    probes = sites.subspan(0, 1);
  } else if (sites.size() == std::size_t(n) + 1) {
    probes = sites.subspan(0, std::size_t(n));
  } else {
    throw std::invalid_argument("nonlinear_example_bound: expected 2 or N+1 site amplitude pairs, got " +
                                std::to_string(sites.size()));
  }
  const auto& aux = sites.back();
  const double pm = std::norm(aux.first), pp = std::norm(aux.second);
  if (std::abs(pm + pp - 1.0) > kTol.site_norm) throw std::invalid_argument("nonlinear_example_bound: aux site is not normalized");
  const auto p = product_weight_distribution(probes, n);
  std::map<long, double> masses;
  for (std::size_t m = 0; m < p.size(); ++m) {
    const long w = 2 * long(m) - n;
    if (pm > 0.0) masses[-w] += p[m] * pm;
    if (pp > 0.0) masses[w] += p[m] * pp;
  }
  return window_certificate(masses, alpha);
}

/// beta(rho, sigma) using the pure/diagonal solver when the probe and generator allow it.
inline double beta_against_invariant(const ProbeState& psi, const HermitianOperator& sigma, double alpha) {
  if (psi.is_pure_vector() && psi.generator.multiplicity_free()) {
    std::vector<double> s(psi.dim());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::max(0.0, sigma(i, i).real());
    return beta_pure_diagonal(psi.amplitudes, s, alpha).value;
  }
  return beta(psi.state, sigma, alpha).value;
}

struct AvgVolumeBounds {
  double at_x = 0.0;
  double averaged = 0.0;
  double truncation = 0.0;
};

/// Average-volume lower bounds (relative to |X|) for a U(1)-covariant family with uniform prior.
/// `epsilon` defaults to alpha / 2.
inline AvgVolumeBounds avg_volume_bounds(const ProbeState& psi, double alpha, double epsilon = -1.0,
                                         const InvariantBoundOptions& opt = {}) {
  detail::check_alpha(alpha);
  if (epsilon < 0.0) epsilon = 0.5 * alpha;
  if (!(epsilon > 0.0 && epsilon < alpha)) throw std::invalid_argument("avg_volume_bounds: epsilon must lie in (0, alpha)");
  AvgVolumeBounds out;
  out.at_x = beta_against_invariant(psi, pinch(psi.state.op(), psi.generator), alpha);
  out.averaged = out.at_x;
  out.truncation = epsilon * invariant_bound(psi, alpha - epsilon, opt).lower;
  return out;
}

}  // namespace qbounds
