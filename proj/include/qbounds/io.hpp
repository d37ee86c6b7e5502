#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "qbounds/linalg.hpp"
#include "qbounds/numerics.hpp"
#include "qbounds/states.hpp"

namespace qbounds {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_real(std::string_view s, std::string_view whole) {
  if (s.empty()) throw ParseError("empty number in '" + std::string(whole) + "'");
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError("malformed number '" + std::string(whole) + "'");
  }
  return v;
}

inline std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

// Next line that is neither blank nor a '#' comment.
inline bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace detail

/// Parses "re", "re+imj", "re-imj" or "imj".
inline cplx parse_complex(std::string_view s) {
  const std::string_view whole = s;
  if (s.empty()) throw ParseError("empty complex entry");
  if (s.back() != 'j') return {detail::parse_real(s, whole), 0.0};
  s.remove_suffix(1);
  // Split at the last sign that is not a leading sign or part of an exponent.
  std::size_t split = std::string_view::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string_view::npos) {
    return {0.0, s.empty() || s == "+" ? 1.0 : (s == "-" ? -1.0 : detail::parse_real(s, whole))};
  }
  const auto im = s.substr(split);
  const double imag = im == "+" ? 1.0 : (im == "-" ? -1.0 : detail::parse_real(im, whole));
  return {detail::parse_real(s.substr(0, split), whole), imag};
}

/// Matrix text format: "dim d" followed by d rows of d entries.
inline ComplexMatrix read_matrix(std::istream& in, const std::string& first_line = {}) {
  std::string line = first_line;
  if (line.empty() && !detail::next_line(in, line)) throw ParseError("matrix: missing 'dim' line");
  const auto head = detail::tokens(line);
  if (head.size() != 2 || head[0] != "dim") throw ParseError("matrix: expected 'dim d', got '" + line + "'");
  long d = 0;
  const auto res = std::from_chars(head[1].data(), head[1].data() + head[1].size(), d);
  if (res.ec != std::errc{} || d < 1) throw ParseError("matrix: bad dimension '" + head[1] + "'");
  std::vector<cplx> entries;
  for (long r = 0; r < d; ++r) {
    if (!detail::next_line(in, line)) throw ParseError("matrix: expected " + std::to_string(d) + " rows");
    const auto row = detail::tokens(line);
    if (long(row.size()) != d) {
      throw ParseError("matrix: row " + std::to_string(r) + " has " + std::to_string(row.size()) + " entries");
    }
    for (const auto& t : row) entries.push_back(parse_complex(t));
  }
  return ComplexMatrix(std::size_t(d), std::move(entries));
}

struct WeightedOperator {
  U1Generator generator;
  HermitianOperator op;
  std::vector<cplx> amplitudes;  // set for "pure" bodies
};

/// State text format: "weights w_0 ... w_{d-1}", then a matrix or "pure a_0 ... a_{d-1}".
/// The operator is only checked for Hermiticity here.
inline WeightedOperator read_weighted_operator(std::istream& in) {
  std::string line;
  if (!detail::next_line(in, line)) throw ParseError("state: empty input");
  auto head = detail::tokens(line);
  if (head.empty() || head[0] != "weights") throw ParseError("state: expected 'weights ...' line");
  std::vector<long> weights;
  for (std::size_t i = 1; i < head.size(); ++i) {
    long w = 0;
    const auto& t = head[i];
    const auto res = std::from_chars(t.data(), t.data() + t.size(), w);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) throw ParseError("state: bad weight '" + t + "'");
    weights.push_back(w);
  }
  if (weights.empty()) throw ParseError("state: no weights");
  if (!detail::next_line(in, line)) throw ParseError("state: missing state body");
  const auto body = detail::tokens(line);
  WeightedOperator out{U1Generator(std::move(weights)), {}, {}};
  try {
    if (!body.empty() && body[0] == "pure") {
      for (std::size_t i = 1; i < body.size(); ++i) out.amplitudes.push_back(parse_complex(body[i]));
      if (out.amplitudes.size() != out.generator.dim()) throw ParseError("state: amplitude count does not match weights");
      out.op = HermitianOperator::symmetrized(ComplexMatrix::outer(out.amplitudes));
    } else {
      out.op = HermitianOperator(read_matrix(in, line));
      if (out.op.dim() != out.generator.dim()) throw ParseError("state: matrix dimension does not match weights");
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("state: ") + e.what());
  }
  return out;
}

inline ProbeState read_state(std::istream& in, const std::string& label) {
  auto w = read_weighted_operator(in);
  try {
    if (!w.amplitudes.empty()) return ProbeState::from_amplitudes(std::move(w.amplitudes), std::move(w.generator), label);
    return ProbeState(DensityMatrix(std::move(w.op)), std::move(w.generator), label);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("state: ") + e.what());
  }
}

inline ProbeState load_state(const std::string& path, const std::string& label) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_state(in, label);
}

inline WeightedOperator load_weighted_operator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_weighted_operator(in);
}

}  // namespace qbounds
