#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qbounds/tolerances.hpp"

namespace qbounds {

using cplx = std::complex<double>;

/// Dense square complex matrix, row-major.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}
  ComplexMatrix(std::size_t dim, std::vector<cplx> entries) : dim_(dim), data_(std::move(entries)) {
    if (data_.size() != dim_ * dim_) {
      throw std::invalid_argument("ComplexMatrix: expected " + std::to_string(dim_ * dim_) + " entries, got " +
                                  std::to_string(data_.size()));
    }
    for (const auto& z : data_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw std::invalid_argument("ComplexMatrix: non-finite entry");
      }
    }
  }

  static ComplexMatrix identity(std::size_t dim) {
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(std::span<const double> d) {
    ComplexMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  /// |v><v|
  static ComplexMatrix outer(std::span<const cplx> v) {
    ComplexMatrix m(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
    return m;
  }

  std::size_t dim() const noexcept { return dim_; }
  cplx& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * dim_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * dim_ + j]; }
  std::span<const cplx> entries() const noexcept { return data_; }

  ComplexMatrix adjoint() const {
    ComplexMatrix m(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  cplx trace() const noexcept {
    cplx t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  /// Largest entry modulus.
  double max_abs() const noexcept {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  double frobenius() const noexcept {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  ComplexMatrix& operator*=(cplx s) noexcept {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    a.check_same(b);
    const std::size_t n = a.dim_;
    ComplexMatrix c(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

 private:
  void check_same(const ComplexMatrix& o) const {
    if (o.dim_ != dim_) {
      throw std::invalid_argument("dimension mismatch: " + std::to_string(dim_) + " vs " + std::to_string(o.dim_));
    }
  }

  std::size_t dim_ = 0;
  std::vector<cplx> data_;
};

/// Hilbert-Schmidt pairing tr(A^dagger B); for Hermitian A this is <A, B>.
inline cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("hs_inner: dimension mismatch");
  cplx s = 0.0;
  const auto ea = a.entries();
  const auto eb = b.entries();
  for (std::size_t k = 0; k < ea.size(); ++k) s += std::conj(ea[k]) * eb[k];
  return s;
}

/// Hermitian observable. Construction checks Hermiticity and then symmetrizes.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(const ComplexMatrix& m, double tol = kTol.hermitian) : inner_(m.dim()) {
    const double scale = std::max(1.0, m.max_abs());
    for (std::size_t i = 0; i < m.dim(); ++i)
      for (std::size_t j = i; j < m.dim(); ++j) {
        if (std::abs(m(i, j) - std::conj(m(j, i))) > tol * scale) {
          throw std::invalid_argument("HermitianOperator: matrix is not Hermitian at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
        }
      }
    symmetrize_from(m);
  }

  /// Symmetrizes without a Hermiticity check; for results of exact Hermitian algebra.
  static HermitianOperator symmetrized(const ComplexMatrix& m) {
    HermitianOperator h;
    h.inner_ = ComplexMatrix(m.dim());
    h.symmetrize_from(m);
    return h;
  }

  static HermitianOperator identity(std::size_t dim) { return symmetrized(ComplexMatrix::identity(dim)); }
  static HermitianOperator diagonal(std::span<const double> d) { return symmetrized(ComplexMatrix::diagonal(d)); }

  std::size_t dim() const noexcept { return inner_.dim(); }
  const ComplexMatrix& matrix() const noexcept { return inner_; }
  cplx operator()(std::size_t i, std::size_t j) const noexcept { return inner_(i, j); }
  double trace() const noexcept { return inner_.trace().real(); }

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    return symmetrized(a.inner_ + b.inner_);
  }
  friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
    return symmetrized(a.inner_ - b.inner_);
  }
  friend HermitianOperator operator*(double s, const HermitianOperator& a) { return symmetrized(a.inner_ * s); }

 private:
  void symmetrize_from(const ComplexMatrix& m) {
    for (std::size_t i = 0; i < m.dim(); ++i) {
      inner_(i, i) = m(i, i).real();
      for (std::size_t j = i + 1; j < m.dim(); ++j) {
        const cplx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
        inner_(i, j) = v;
        inner_(j, i) = std::conj(v);
      }
    }
  }

  ComplexMatrix inner_;
};

/// <A, B> = tr(A B) for Hermitian operators (real).
inline double pairing(const HermitianOperator& a, const HermitianOperator& b) {
  return hs_inner(a.matrix(), b.matrix()).real();
}

struct EigenSystem {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix basis;              // columns are eigenvectors
};

/// Raised when the Jacobi sweep cap is reached.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
inline EigenSystem eigh(const HermitianOperator& op, const Tolerances& tol = kTol) {
  const std::size_t n = op.dim();
  ComplexMatrix a = op.matrix();
  ComplexMatrix v = ComplexMatrix::identity(n);

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  const double scale = std::max(a.frobenius(), 1e-300);
  double off = off_norm();
  int sweep = 0;
  while (off > tol.jacobi_offdiag * scale) {
    if (sweep++ >= tol.jacobi_max_sweeps) {
      throw ConvergenceError("eigh: Jacobi iteration did not converge (off-diagonal norm " + std::to_string(off) + ")",
                             off);
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        if (mag < 1e-300 || (std::abs(app) + 100.0 * mag == std::abs(app) &&
                             std::abs(aqq) + 100.0 * mag == std::abs(aqq))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        // U = diag(1, e^{-i phi}) * [[c, s], [-s, c]] annihilates a(p, q) under U^dagger a U.
        const cplx phase = apq / mag;  // e^{i phi}
        const double theta = (aqq - app) / (2.0 * mag);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const cplx upp = c;
        const cplx upq = s;
        const cplx uqp = -s * std::conj(phase);
        const cplx uqq = c * std::conj(phase);

        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p);
          const cplx akq = a(k, q);
          a(k, p) = akp * upp + akq * uqp;
          a(k, q) = akp * upq + akq * uqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k);
          const cplx aqk = a(q, k);
          a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v(k, p);
          const cplx vkq = v(k, q);
          v(k, p) = vkp * upp + vkq * uqp;
          v(k, q) = vkp * upq + vkq * uqq;
        }
      }
    }
    off = off_norm();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  EigenSystem es;
  es.eigenvalues.resize(n);
  es.basis = ComplexMatrix(n);
  for (std::size_t k = 0; k < n; ++k) {
    es.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) es.basis(i, k) = v(i, order[k]);
  }
  return es;
}

/// U diag(f(lambda)) U^dagger.
template <typename F>
HermitianOperator spectral_map(const EigenSystem& es, F&& f) {
  const std::size_t n = es.eigenvalues.size();
  ComplexMatrix m(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(es.eigenvalues[k]);
    if (fk == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx uik = es.basis(i, k) * fk;
      for (std::size_t j = 0; j < n; ++j) m(i, j) += uik * std::conj(es.basis(j, k));
    }
  }
  return HermitianOperator::symmetrized(m);
}

/// <v_k| A |v_k> for column k of the eigenbasis.
inline double expectation_in_column(const HermitianOperator& a, const ComplexMatrix& basis, std::size_t k) {
  const std::size_t n = a.dim();
  cplx s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cplx row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += a(i, j) * basis(j, k);
    s += std::conj(basis(i, k)) * row;
  }
  return s.real();
}

/// Operator norm of a Hermitian operator.
inline double operator_norm(const HermitianOperator& a) {
  if (a.dim() == 0) return 0.0;
  const auto es = eigh(a);
  return std::max(std::abs(es.eigenvalues.front()), std::abs(es.eigenvalues.back()));
}

}  // namespace qbounds
