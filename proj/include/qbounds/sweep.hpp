#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qbounds/hypotest.hpp"
#include "qbounds/io.hpp"
#include "qbounds/repbounds.hpp"
#include "qbounds/states.hpp"
#include "qbounds/symmetry.hpp"

namespace qbounds {

struct SweepConfig {
  std::vector<std::string> states;
  long n_start = 1;
  long n_stop = 0;
  long n_step = 1;
  double alpha = 0.9;
  double tol = 1e-4;
  int max_iter = 5000;
  StepRule step_rule = StepRule::diminishing;
  long d = 2;              // local dimension for pure-state-bound
  std::string output_path; // empty: caller writes
  bool parallel = false;
  int workers = 0;         // 0: hardware concurrency
  bool timing = false;     // fill the seconds column (otherwise 0 for byte-stable output)
  bool verify = false;

  void validate() const {
    if (n_start < 1) throw std::invalid_argument("sweep: N start must be >= 1");
    if (n_step < 1) throw std::invalid_argument("sweep: N step must be >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("sweep: alpha must lie in (0, 1]");
    if (!(tol > 0.0)) throw std::invalid_argument("sweep: tol must be positive");
    if (states.empty()) throw std::invalid_argument("sweep: no states given");
  }
};

struct SweepRow {
  std::string state;
  long N = 0;
  double alpha = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int iters = 0;
  double seconds = 0.0;
  bool converged = true;
  bool verified = true;
};

inline const std::vector<std::string>& builtin_state_labels() {
  static const std::vector<std::string> labels = {"ghz", "plus", "sine", "uniform", "optimal-u1", "pure-state-bound"};
  return labels;
}

/// Builtin probe families indexed by label; pure-state-bound is a closed form and has no probe.
inline ProbeState builtin_state(const std::string& label, long n) {
  if (label == "ghz") return ghz(n);
  if (label == "plus") return plus_power(n);
  if (label == "sine") return sine_state(n);
  if (label == "uniform") return uniform_phase_state(n);
  if (label == "optimal-u1") return optimal_probe_state(U1Generator::qubit_symmetric(n));
  throw std::invalid_argument("unknown builtin state '" + label + "'");
}

inline std::vector<long> n_values(const SweepConfig& cfg) {
  std::vector<long> out;
  for (long n = cfg.n_start; n <= cfg.n_stop; n += cfg.n_step) out.push_back(n);
  return out;
}

inline SweepRow solve_row(const SweepConfig& cfg, const std::string& label, long n) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepRow row{label, n, cfg.alpha};
  if (label == "pure-state-bound") {
    row.lower = row.upper = pure_state_bound(cfg.d, n, cfg.alpha);
  } else {
    const auto psi = builtin_state(label, n);
    const auto b = invariant_bound(psi, cfg.alpha, {cfg.tol, cfg.max_iter, cfg.step_rule});
    row.lower = b.lower;
    row.upper = b.upper;
    row.iters = b.iterations;
    row.converged = b.converged;
    if (cfg.verify) {
      const auto check = beta(psi.state, b.sigma_cert.assemble(), cfg.alpha);
      const double upper = twirl_norm(b.test_cert.E, psi.generator);
      const bool feasible = pairing(psi.state.op(), b.test_cert.E) >= cfg.alpha - 1e-9 && is_valid_test(b.test_cert.E);
      row.verified = std::abs(check.value - b.lower) <= 1e-8 && std::abs(upper - b.upper) <= 1e-8 && feasible;
    }
  }
  if (cfg.timing) row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

/// One row per (state, N), ordered by the state list and then by N.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  for (const auto& s : cfg.states)
    if (std::find(builtin_state_labels().begin(), builtin_state_labels().end(), s) == builtin_state_labels().end())
      throw std::invalid_argument("unknown builtin state '" + s + "'");

  struct Task {
    std::size_t state_index;
    long n;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < cfg.states.size(); ++i)
    for (long n : n_values(cfg)) tasks.push_back({i, n});

  std::vector<SweepRow> rows(tasks.size());
  unsigned workers = 1;
  if (cfg.parallel) {
    workers = cfg.workers > 0 ? unsigned(cfg.workers) : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, std::max<std::size_t>(1, tasks.size()));
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < tasks.size();) {
      try {
        rows[k] = solve_row(cfg, cfg.states[tasks[k].state_index], tasks[k].n);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  // Tasks are generated in output order, so rows are already sorted.
  return rows;
}

inline const char* kSweepHeader = "state,N,alpha,lower,upper,iters,seconds";

inline void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << r.state << ',' << r.N << ',' << format_double(r.alpha) << ',' << format_double(r.lower) << ','
        << format_double(r.upper) << ',' << r.iters << ',' << format_double(r.seconds) << '\n';
  }
}

/// Two-column (N, lower) blocks per state, separated by blank lines.
inline void write_dat(std::ostream& out, const std::vector<SweepRow>& rows) {
  std::string current;
  bool first = true;
  for (const auto& r : rows) {
    if (first || r.state != current) {
      if (!first) out << "\n\n";
      out << "# " << r.state << '\n';
      current = r.state;
      first = false;
    }
    out << r.N << ' ' << format_double(r.lower) << '\n';
  }
}

/// Parses rows written by write_csv.
inline std::vector<SweepRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) throw ParseError("fit: expected sweep CSV header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() != 7) throw ParseError("fit: malformed row '" + line + "'");
    try {
      SweepRow r;
      r.state = cols[0];
      r.N = std::stol(cols[1]);
      r.alpha = std::stod(cols[2]);
      r.lower = std::stod(cols[3]);
      r.upper = std::stod(cols[4]);
      r.iters = std::stoi(cols[5]);
      r.seconds = std::stod(cols[6]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ParseError("fit: malformed row '" + line + "'");
    }
  }
  return rows;
}

/// Per-state fit of log(lower) against log(N) over the upper half of the N values (at least 4 points).
inline std::map<std::string, ScalingFit> fit_report(const std::vector<SweepRow>& rows) {
  std::map<std::string, std::vector<std::pair<double, double>>> by_state;
  for (const auto& r : rows) by_state[r.state].push_back({double(r.N), r.lower});
  std::map<std::string, ScalingFit> out;
  for (auto& [state, pts] : by_state) {
    if (pts.size() < 4) throw std::invalid_argument("fit: state '" + state + "' has fewer than 4 rows");
    std::sort(pts.begin(), pts.end());
    const std::size_t keep = std::max<std::size_t>(4, (pts.size() + 1) / 2);
    const std::vector<std::pair<double, double>> tail(pts.end() - std::ptrdiff_t(keep), pts.end());
    out[state] = scaling_exponent(tail);
  }
  return out;
}

/// Flat "key = value" configuration; '#' starts a comment.
inline std::map<std::string, std::string> read_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

/// "a:b:s" or "a:b" (step 1).
inline void parse_n_range(const std::string& spec, long& start, long& stop, long& step) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() < 2 || parts.size() > 3) throw ParseError("N range must be a:b or a:b:s, got '" + spec + "'");
  try {
    start = std::stol(parts[0]);
    stop = std::stol(parts[1]);
    step = parts.size() == 3 ? std::stol(parts[2]) : 1;
  } catch (const std::logic_error&) {
    throw ParseError("N range must be a:b or a:b:s, got '" + spec + "'");
  }
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ',');) {
    const auto a = p.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    out.push_back(p.substr(a, p.find_last_not_of(" \t") - a + 1));
  }
  return out;
}

inline StepRule parse_step_rule(const std::string& s) {
  if (s == "diminishing") return StepRule::diminishing;
  if (s == "polyak") return StepRule::polyak;
  throw ParseError("step rule must be diminishing or polyak, got '" + s + "'");
}

/// Applies recognized keys from a config map onto cfg.
inline void apply_config(const std::map<std::string, std::string>& kv, SweepConfig& cfg) {
  auto as_bool = [](const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError("expected boolean, got '" + v + "'");
  };
  try {
    for (const auto& [k, v] : kv) {
      if (k == "states") cfg.states = split_list(v);
      else if (k == "N_range") parse_n_range(v, cfg.n_start, cfg.n_stop, cfg.n_step);
      else if (k == "alpha") cfg.alpha = std::stod(v);
      else if (k == "tol") cfg.tol = std::stod(v);
      else if (k == "max_iter") cfg.max_iter = std::stoi(v);
      else if (k == "step") cfg.step_rule = parse_step_rule(v);
      else if (k == "d") cfg.d = std::stol(v);
      else if (k == "output") cfg.output_path = v;
      else if (k == "parallel") cfg.parallel = as_bool(v);
      else if (k == "workers") cfg.workers = std::stoi(v);
      else if (k == "timing") cfg.timing = as_bool(v);
      else if (k == "verify") cfg.verify = as_bool(v);
      else throw ParseError("unknown config key '" + k + "'");
    }
  } catch (const std::logic_error& e) {
    throw ParseError(std::string("config: bad value: ") + e.what());
  }
}

}  // namespace qbounds
