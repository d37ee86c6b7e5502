#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbounds/linalg.hpp"
#include "qbounds/tolerances.hpp"

namespace qbounds {

/// Positive semidefinite Hermitian operator with unit trace.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(HermitianOperator op, const Tolerances& tol = kTol) : inner_(std::move(op)) {
    if (inner_.dim() == 0) throw std::invalid_argument("DensityMatrix: empty matrix");
    const double tr = inner_.trace();
    if (std::abs(tr - 1.0) > tol.trace) {
      throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) + " differs from 1");
    }
    const auto es = eigh(inner_);
    if (es.eigenvalues.front() < -tol.psd) {
      throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(es.eigenvalues.front()));
    }
  }
  explicit DensityMatrix(const ComplexMatrix& m, const Tolerances& tol = kTol)
      : DensityMatrix(HermitianOperator(m), tol) {}

  /// |psi><psi| for a normalized amplitude vector.
  static DensityMatrix pure(std::span<const cplx> amplitudes, double norm_tol = 1e-10) {
    double n2 = 0.0;
    for (const auto& a : amplitudes) n2 += std::norm(a);
    if (std::abs(n2 - 1.0) > norm_tol) {
      throw std::invalid_argument("DensityMatrix::pure: amplitude vector has squared norm " + std::to_string(n2));
    }
    DensityMatrix d;
    d.inner_ = HermitianOperator::symmetrized(ComplexMatrix::outer(amplitudes));
    return d;
  }

  /// Skips validation; for states produced by trace- and positivity-preserving maps.
  static DensityMatrix trusted(HermitianOperator op) {
    DensityMatrix d;
    d.inner_ = std::move(op);
    return d;
  }

  static DensityMatrix maximally_mixed(std::size_t dim) {
    return trusted(HermitianOperator::symmetrized(ComplexMatrix::identity(dim) * cplx(1.0 / double(dim))));
  }

  std::size_t dim() const noexcept { return inner_.dim(); }
  const HermitianOperator& op() const noexcept { return inner_; }
  const ComplexMatrix& matrix() const noexcept { return inner_.matrix(); }
  cplx operator()(std::size_t i, std::size_t j) const noexcept { return inner_(i, j); }

 private:
  HermitianOperator inner_;
};

struct PositivePart {
  HermitianOperator op;  // {A}_+
  double weight = 0.0;   // tr {A}_+
};

inline PositivePart positive_part(const HermitianOperator& a) {
  const auto es = eigh(a);
  PositivePart out;
  out.op = spectral_map(es, [](double l) { return l > 0.0 ? l : 0.0; });
  for (double l : es.eigenvalues)
    if (l > 0.0) out.weight += l;
  return out;
}

/// Sum of absolute eigenvalues.
inline double trace_norm(const HermitianOperator& a) {
  double s = 0.0;
  for (double l : eigh(a).eigenvalues) s += std::abs(l);
  return s;
}

inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& rho2) {
  if (rho.dim() != rho2.dim()) {
    throw std::invalid_argument("trace_distance: dimension mismatch " + std::to_string(rho.dim()) + " vs " +
                                std::to_string(rho2.dim()));
  }
  return std::clamp(0.5 * trace_norm(rho.op() - rho2.op()), 0.0, 1.0);
}

/// Eigenvalues clipped below the tolerance and renormalized to unit sum.
inline std::vector<double> clipped_spectrum(const DensityMatrix& rho, const Tolerances& tol = kTol) {
  auto ev = eigh(rho.op()).eigenvalues;
  double s = 0.0;
  for (auto& l : ev) {
    if (l < tol.clip) l = 0.0;
    l = std::min(l, 1.0);
    s += l;
  }
  if (s > 0.0)
    for (auto& l : ev) l /= s;
  return ev;
}

/// -sum p log p with 0 log 0 = 0 (natural log).
inline double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
  const auto ev = clipped_spectrum(rho);
  return shannon_entropy(ev);
}

/// h(p) = -p log p - (1-p) log(1-p).
inline double binary_entropy(double p) {
  const double q = 1.0 - p;
  return (p > 0.0 ? -p * std::log(p) : 0.0) + (q > 0.0 ? -q * std::log(q) : 0.0);
}

/// d(p || q) = p log(p/q) + (1-p) log((1-p)/(1-q)); +inf when the support condition fails.
inline double binary_relative_entropy(double p, double q) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double d = 0.0;
  if (p > 0.0) {
    if (q <= 0.0) return inf;
    d += p * std::log(p / q);
  }
  if (p < 1.0) {
    if (q >= 1.0) return inf;
    d += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  }
  return d;
}

/// D(rho || sigma) for PSD sigma (not necessarily normalized); +inf if supp rho is not inside supp sigma.
inline double relative_entropy(const DensityMatrix& rho, const HermitianOperator& sigma, const Tolerances& tol = kTol) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("relative_entropy: dimension mismatch");
  const double neg_entropy = -von_neumann_entropy(rho);
  const auto es = eigh(sigma);
  double cross = 0.0;
  for (std::size_t k = 0; k < es.eigenvalues.size(); ++k) {
    const double mass = expectation_in_column(rho.op(), es.basis, k);
    const double s = es.eigenvalues[k];
    if (s <= tol.support) {
      if (mass > tol.support) return std::numeric_limits<double>::infinity();
      continue;
    }
    if (mass > 0.0) cross += mass * std::log(s);
  }
  return neg_entropy - cross;
}

inline double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma, const Tolerances& tol = kTol) {
  return std::max(0.0, relative_entropy(rho, sigma.op(), tol));
}

}  // namespace qbounds
