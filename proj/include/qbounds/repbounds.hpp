#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace qbounds {

using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const BigInt& x) { return x.convert_to<double>(); }

/// Partition in English convention; trailing zeros are allowed and ignored by size().
struct YoungDiagram {
  std::vector<long> rows;

  YoungDiagram() = default;
  explicit YoungDiagram(std::vector<long> r) : rows(std::move(r)) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] < 0) throw std::invalid_argument("YoungDiagram: negative row length");
      if (i > 0 && rows[i] > rows[i - 1]) throw std::invalid_argument("YoungDiagram: rows must be nonincreasing");
    }
  }

  long size() const {
    long s = 0;
    for (long r : rows) s += r;
    return s;
  }

  /// Number of nonzero rows.
  std::size_t length() const {
    std::size_t n = 0;
    for (long r : rows)
      if (r > 0) ++n;
    return n;
  }

  std::vector<long> padded(std::size_t d) const {
    if (length() > d) {
      throw std::invalid_argument("YoungDiagram: " + std::to_string(length()) + " rows exceed d = " + std::to_string(d));
    }
    std::vector<long> out(d, 0);
    for (std::size_t i = 0; i < std::min(d, rows.size()); ++i) out[i] = rows[i];
    return out;
  }

  friend bool operator==(const YoungDiagram& a, const YoungDiagram& b) {
    const std::size_t n = std::max(a.rows.size(), b.rows.size());
    return a.padded(n) == b.padded(n);
  }
};

struct IrrepBlock {
  YoungDiagram lam;
  BigInt d_lam;  // U(d) dimension
  BigInt m_lam;  // S_N dimension (multiplicity)
  BigInt r_lam;  // min(d_lam, m_lam)
};

struct BranchEntry {
  YoungDiagram mu;
  BigInt d_mu;
  BigInt m_lam_mu;  // 1 for every interlacing mu
  BigInt r_lam_mu;  // min(m_lam_mu, m_lam), which is 1 since m_lam >= 1
};

/// Dimension of the U(d) irrep with highest weight lambda.
inline BigInt weyl_dim(const YoungDiagram& lam, std::size_t d) {
  if (d == 0) throw std::invalid_argument("weyl_dim: d must be positive");
  const auto l = lam.padded(d);
  BigInt num = 1, den = 1;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      num *= BigInt(l[i] - l[j] + long(j) - long(i));
      den *= BigInt(long(j) - long(i));
    }
  return num / den;
}

/// Number of standard Young tableaux of shape lambda (hook length formula).
inline BigInt sn_dim(const YoungDiagram& lam) {
  const long n = lam.size();
  if (n < 1) throw std::invalid_argument("sn_dim: empty diagram");
  const auto rows = lam.padded(lam.length());
  BigInt num = 1;
  for (long k = 2; k <= n; ++k) num *= k;
  BigInt hooks = 1;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (long j = 0; j < rows[i]; ++j) {
      long below = 0;
      for (std::size_t k = i + 1; k < rows.size() && rows[k] > j; ++k) ++below;
      hooks *= BigInt(rows[i] - j + below);
    }
  return num / hooks;
}

/// Partitions of n with at most `parts` rows, each padded to `parts`, in reverse lexicographic order.
inline std::vector<YoungDiagram> partitions(long n, std::size_t parts) {
  std::vector<YoungDiagram> out;
  std::vector<long> cur;
  std::function<void(long, long)> rec = [&](long remaining, long cap) {
    if (cur.size() == parts) {
      if (remaining == 0) out.emplace_back(cur);
      return;
    }
    for (long r = std::min(remaining, cap); r >= 0; --r) {
      if (r * long(parts - cur.size()) < remaining) break;
      cur.push_back(r);
      rec(remaining - r, r);
      cur.pop_back();
    }
  };
  rec(n, n);
  return out;
}

inline void check_dn(long d, long n, const char* who) {
  if (d < 2) throw std::invalid_argument(std::string(who) + ": d must be >= 2");
  if (n < 1) throw std::invalid_argument(std::string(who) + ": N must be >= 1");
}

/// Irrep blocks of (C^d)^{tensor N} under U(d) x S_N.
inline std::vector<IrrepBlock> schur_weyl(long d, long n) {
  check_dn(d, n, "schur_weyl");
  std::vector<IrrepBlock> out;
  for (auto& lam : partitions(n, std::size_t(d))) {
    IrrepBlock b;
    b.d_lam = weyl_dim(lam, std::size_t(d));
    b.m_lam = sn_dim(lam);
    b.r_lam = std::min(b.d_lam, b.m_lam);
    b.lam = std::move(lam);
    out.push_back(std::move(b));
  }
  return out;
}

/// Sum over blocks of d_lam * r_lam.
inline BigInt group_denominator(long d, long n) {
  BigInt s = 0;
  for (const auto& b : schur_weyl(d, n)) s += b.d_lam * b.r_lam;
  return s;
}

inline double group_bound(long d, long n, double alpha) { return alpha / to_double(group_denominator(d, n)); }

/// U(d) -> U(d-1) branching: all mu interlacing lambda.
inline std::vector<BranchEntry> branch(const YoungDiagram& lam, std::size_t d) {
  if (d < 2) throw std::invalid_argument("branch: d must be >= 2");
  const auto l = lam.padded(d);
  std::vector<BranchEntry> out;
  std::vector<long> mu(d - 1);
  std::function<void(std::size_t)> rec = [&](std::size_t j) {
    if (j == d - 1) {
      BranchEntry e;
      e.mu = YoungDiagram(mu);
      e.d_mu = weyl_dim(e.mu, d - 1);
      e.m_lam_mu = 1;
      e.r_lam_mu = 1;
      out.push_back(std::move(e));
      return;
    }
    for (long v = l[j]; v >= l[j + 1]; --v) {
      mu[j] = v;
      rec(j + 1);
    }
  };
  rec(0);
  return out;
}

inline std::vector<BranchEntry> branch(const YoungDiagram& lam) { return branch(lam, lam.rows.size()); }

struct HomogeneousDenominator {
  YoungDiagram mu;  // maximizing U(d-1) label
  BigInt numerator; // sum over lambda containing mu of d_lam * r_lam_mu
  BigInt d_mu;
  double value = 0.0;
};

/// max over mu of (sum_lambda d_lam r^lam_mu) / d_mu, aggregated over all Schur-Weyl lambda.
inline HomogeneousDenominator homogeneous_denominator(long d, long n) {
  check_dn(d, n, "homogeneous_bound");
  std::map<std::vector<long>, std::pair<BigInt, BigInt>> acc;  // mu -> (sum, d_mu)
  for (const auto& b : schur_weyl(d, n)) {
    for (auto& e : branch(b.lam, std::size_t(d))) {
      const BigInt r = std::min(e.m_lam_mu, b.m_lam);
      auto [it, fresh] = acc.try_emplace(e.mu.rows, BigInt(0), e.d_mu);
      it->second.first += b.d_lam * r;
    }
  }
  HomogeneousDenominator best;
  for (auto& [mu, p] : acc) {
    // Compare p.first / p.second against best.numerator / best.d_mu exactly.
    if (best.d_mu == 0 || p.first * best.d_mu > best.numerator * p.second) {
      best.mu = YoungDiagram(mu);
      best.numerator = p.first;
      best.d_mu = p.second;
    }
  }
  best.value = to_double(best.numerator) / to_double(best.d_mu);
  return best;
}

inline double homogeneous_bound(long d, long n, double alpha) { return alpha / homogeneous_denominator(d, n).value; }

inline BigInt max_weyl_dim(long d, long n) {
  BigInt best = 0;
  for (const auto& b : schur_weyl(d, n)) best = std::max(best, b.d_lam);
  return best;
}

inline double mixed_state_bound(long d, long n, double alpha) { return alpha / to_double(max_weyl_dim(d, n)); }

inline BigInt binomial(long n, long k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Dimension of the symmetric subspace of (C^d)^{tensor N}.
inline BigInt symmetric_dim(long d, long n) {
  check_dn(d, n, "pure_state_bound");
  return binomial(n + d - 1, d - 1);
}

inline double pure_state_bound(long d, long n, double alpha) { return alpha / to_double(symmetric_dim(d, n)); }

/// Number of distinct values of w_1 + ... + w_N with each w_k drawn from h.
inline std::size_t u1_eigenvalue_count(std::span<const long> h, long n) {
  if (h.empty()) throw std::invalid_argument("u1_eigenvalue_count: empty weight vector");
  if (n < 1) throw std::invalid_argument("u1_eigenvalue_count: N must be >= 1");
  const std::set<long> distinct(h.begin(), h.end());
  const long lo = *distinct.begin(), hi = *distinct.rbegin();
  // Sums are shifted by -lo per site so the range is [0, (hi - lo) N].
  std::vector<char> cur(std::size_t((hi - lo) * n + 1), 0);
  cur[0] = 1;
  long reach = 0;
  for (long k = 0; k < n; ++k) {
    std::vector<char> next(cur.size(), 0);
    for (long s = 0; s <= reach; ++s) {
      if (!cur[std::size_t(s)]) continue;
      for (long w : distinct) next[std::size_t(s + w - lo)] = 1;
    }
    reach += hi - lo;
    cur = std::move(next);
  }
  std::size_t count = 0;
  for (char c : cur) count += c ? 1 : 0;
  return count;
}

struct ScalingFit {
  double constant = 0.0;  // value ~ constant * N^slope
  double slope = 0.0;
  double r2 = 0.0;
};

/// Least-squares fit of log(value) against log(N).
inline ScalingFit scaling_exponent(std::span<const std::pair<double, double>> points) {
  if (points.size() < 4) throw std::invalid_argument("scaling_exponent: need at least 4 points");
  const double n = double(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("scaling_exponent: N and values must be positive");
    sx += std::log(x);
    sy += std::log(y);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx, dy = std::log(y) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("scaling_exponent: all N equal");
  ScalingFit f;
  f.slope = sxy / sxx;
  f.constant = std::exp(my - f.slope * mx);
  const double ss_res = std::max(0.0, syy - f.slope * sxy);
  f.r2 = syy > 1e-300 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return f;
}

}  // namespace qbounds
