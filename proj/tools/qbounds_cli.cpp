#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qbounds/qbounds.hpp"

using namespace qbounds;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kBadInput = 2;
constexpr int kNotConverged = 3;

struct BadInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "builtin:name" (needs --N) or a path in the state text format.
ProbeState resolve_state(const std::string& spec, long n) {
  constexpr std::string_view prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) {
    const auto name = spec.substr(prefix.size());
    if (n < 1) throw BadInput("builtin states need --N >= 1");
    if (name == "pure-state-bound") throw BadInput("pure-state-bound is a sweep-only closed form");
    return builtin_state(name, n);
  }
  return load_state(spec, std::filesystem::path(spec).stem().string());
}

SiteAmplitudes parse_site(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw BadInput("site amplitudes must be 'a,b', got '" + s + "'");
  return {parse_complex(s.substr(0, comma)), parse_complex(s.substr(comma + 1))};
}

std::vector<long> parse_longs(const std::string& s) {
  std::vector<long> out;
  for (const auto& p : split_list(s)) out.push_back(std::stol(p));
  return out;
}

struct BetaArgs {
  std::string rho, sigma;
  double alpha = 0.9;
};

int run_beta(const BetaArgs& a) {
  const auto rho = load_state(a.rho, "rho");
  const auto sigma = load_weighted_operator(a.sigma);
  const auto r = beta(rho.state, sigma.op, a.alpha);
  std::cout << "alpha,value,gap,mu\n"
            << format_double(r.alpha) << ',' << format_double(r.value) << ',' << format_double(r.gap) << ','
            << format_double(r.dual.mu) << '\n';
  return kOk;
}

struct BoundArgs {
  std::string state;
  long n = 0;
  double alpha = 0.9;
  double tol = 1e-4;
  int max_iter = 5000;
  std::string step = "diminishing";
  bool strict = false;
};

int run_invariant_bound(const BoundArgs& a) {
  const auto psi = resolve_state(a.state, a.n);
  const auto b = invariant_bound(psi, a.alpha, {a.tol, a.max_iter, parse_step_rule(a.step)});
  const long n_col = a.n > 0 ? a.n : long(psi.dim());
  std::cout << "label,N,alpha,lower,upper,iters\n"
            << psi.label << ',' << n_col << ',' << format_double(a.alpha) << ',' << format_double(b.lower) << ','
            << format_double(b.upper) << ',' << b.iterations << '\n';
  if (!b.converged) {
    std::cerr << "warning: relative bracket width " << format_double((b.upper - b.lower) / b.upper) << " above tolerance "
              << format_double(a.tol) << '\n';
    if (a.strict) return kNotConverged;
  }
  return kOk;
}

struct SweepArgs {
  std::string config, states, n_range, output, dat, step;
  double alpha = -1.0, tol = -1.0;
  int max_iter = -1, workers = -1;
  long d = -1;
  bool parallel = false, timing = false, verify = false, strict = false;
};

int run_sweep_cmd(const SweepArgs& a) {
  SweepConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw BadInput("cannot open config '" + a.config + "'");
    apply_config(read_config(in), cfg);
  }
  if (!a.states.empty()) cfg.states = split_list(a.states);
  if (!a.n_range.empty()) parse_n_range(a.n_range, cfg.n_start, cfg.n_stop, cfg.n_step);
  if (a.alpha >= 0.0) cfg.alpha = a.alpha;
  if (a.tol >= 0.0) cfg.tol = a.tol;
  if (a.max_iter >= 0) cfg.max_iter = a.max_iter;
  if (a.workers >= 0) cfg.workers = a.workers;
  if (a.d >= 0) cfg.d = a.d;
  if (!a.step.empty()) cfg.step_rule = parse_step_rule(a.step);
  if (!a.output.empty()) cfg.output_path = a.output;
  cfg.parallel = cfg.parallel || a.parallel;
  cfg.timing = cfg.timing || a.timing;
  cfg.verify = cfg.verify || a.verify;

  const auto rows = run_sweep(cfg);
  if (cfg.output_path.empty()) {
    write_csv(std::cout, rows);
  } else {
    std::ofstream out(cfg.output_path);
    if (!out) throw BadInput("cannot write '" + cfg.output_path + "'");
    write_csv(out, rows);
  }
  std::string dat = a.dat;
  if (dat.empty() && !cfg.output_path.empty()) dat = std::filesystem::path(cfg.output_path).replace_extension(".dat").string();
  if (!dat.empty()) {
    std::ofstream out(dat);
    if (!out) throw BadInput("cannot write '" + dat + "'");
    write_dat(out, rows);
  }

  int code = kOk;
  for (const auto& r : rows) {
    if (!r.verified) {
      std::cerr << "error: certificate mismatch for " << r.state << " N=" << r.N << '\n';
      code = kVerifyFailed;
    }
  }
  if (code != kOk) return code;
  for (const auto& r : rows) {
    if (!r.converged) {
      std::cerr << "warning: " << r.state << " N=" << r.N << " did not reach tolerance\n";
      if (a.strict) code = kNotConverged;
    }
  }
  return code;
}

struct RepArgs {
  std::string mode = "group", n_range, h;
  long d = 2;
  double alpha = 0.9;
};

int run_rep_bound(const RepArgs& a) {
  long start = 1, stop = 0, step = 1;
  parse_n_range(a.n_range, start, stop, step);
  if (start < 1 || step < 1) throw BadInput("N range needs start >= 1 and step >= 1");
  std::cout << "mode,d,N,denominator,bound\n";
  for (long n = start; n <= stop; n += step) {
    std::string denom;
    double value = 0.0;
    if (a.mode == "group") {
      const auto x = group_denominator(a.d, n);
      denom = x.str();
      value = a.alpha / to_double(x);
    } else if (a.mode == "homogeneous") {
      const auto x = homogeneous_denominator(a.d, n);
      denom = format_double(x.value);
      value = a.alpha / x.value;
    } else if (a.mode == "mixed") {
      const auto x = max_weyl_dim(a.d, n);
      denom = x.str();
      value = a.alpha / to_double(x);
    } else if (a.mode == "pure") {
      const auto x = symmetric_dim(a.d, n);
      denom = x.str();
      value = a.alpha / to_double(x);
    } else if (a.mode == "u1count") {
      if (a.h.empty()) throw BadInput("u1count needs --weights");
      const auto h = parse_longs(a.h);
      const auto x = u1_eigenvalue_count(h, n);
      denom = std::to_string(x);
      value = a.alpha / double(x);
    } else {
      throw BadInput("unknown mode '" + a.mode + "'");
    }
    std::cout << a.mode << ',' << a.d << ',' << n << ',' << denom << ',' << format_double(value) << '\n';
  }
  return kOk;
}

struct CorollaryArgs {
  std::string which, site = "0.7071067811865476,0.7071067811865476", aux = "1,0", state;
  double c = 1.0, d_const = 1.0, h = 0.0, p = 0.9, volume = 2.0 * std::numbers::pi, energy = 0.0, alpha = 0.9,
         epsilon = -1.0, m = 1.0;
  long n = 1, k = 1;
  bool has_c = false, has_d = false;
};

int run_corollary(const CorollaryArgs& a) {
  const auto& w = a.which;
  auto out = [](std::initializer_list<std::string> cols) {
    bool first = true;
    for (const auto& c : cols) {
      std::cout << (first ? "" : ",") << c;
      first = false;
    }
    std::cout << '\n';
  };
  auto f = format_double;
  if (w == "mse-h") {
    if (!a.has_c) throw BadInput("mse-h needs --C");
    out({"which", "C", "N", "bound"});
    out({w, f(a.c), std::to_string(a.n), f(heisenberg_mse_bound(a.c, a.n))});
  } else if (w == "mse-sn") {
    if (!a.has_d) throw BadInput("mse-sn needs --D");
    out({"which", "D", "N", "bound"});
    out({w, f(a.d_const), std::to_string(a.n), f(shotnoise_mse_bound(a.d_const, a.n))});
  } else if (w == "entropic") {
    out({"which", "H", "p_succ", "volume", "bound", "rmse_circle"});
    out({w, f(a.h), f(a.p), f(a.volume), f(entropic_region_bound(a.h, a.p, a.volume)), f(entropic_mse_bound_circle(a.h))});
  } else if (w == "energy") {
    out({"which", "E", "p_succ", "bound"});
    out({w, f(a.energy), f(a.p), f(energy_bounded_bound(a.energy, a.p))});
  } else if (w == "separable") {
    const std::vector<SiteAmplitudes> sites{parse_site(a.site)};
    const auto cert = separable_certificate(sites, a.n, a.alpha);
    out({"which", "N", "alpha", "certificate", "window", "feasible", "analytic"});
    out({w, std::to_string(a.n), f(a.alpha), f(cert.value), std::to_string(cert.window_count),
         cert.feasible ? "1" : "0", f(separable_analytic_bound(a.m, a.k, a.n, a.alpha))});
  } else if (w == "nonlinear") {
    const std::vector<SiteAmplitudes> sites{parse_site(a.site), parse_site(a.aux)};
    const auto cert = nonlinear_example_bound(sites, a.n, a.alpha);
    out({"which", "N", "alpha", "certificate", "window", "feasible"});
    out({w, std::to_string(a.n), f(a.alpha), f(cert.value), std::to_string(cert.window_count), cert.feasible ? "1" : "0"});
  } else if (w == "avg") {
    if (a.state.empty()) throw BadInput("avg needs --state");
    const auto psi = resolve_state(a.state, a.n);
    const auto b = avg_volume_bounds(psi, a.alpha, a.epsilon);
    out({"which", "label", "alpha", "at_x", "averaged", "truncation"});
    out({w, psi.label, f(a.alpha), f(b.at_x), f(b.averaged), f(b.truncation)});
  } else {
    throw BadInput("unknown corollary '" + w + "'");
  }
  return kOk;
}

struct EntropyArgs {
  std::string state;
  long n = 0;
  double volume = 2.0 * std::numbers::pi;
  double p = 1.0;
  bool bits = false;
};

int run_entropy(const EntropyArgs& a) {
  const auto psi = resolve_state(a.state, a.n);
  const double h = conditional_entropy_covariant(psi, a.volume);
  const double shown = a.bits ? h / std::numbers::ln2 : h;
  std::cout << "label,volume,h_cond,unit,region_bound,rmse_circle\n"
            << psi.label << ',' << format_double(a.volume) << ',' << format_double(shown) << ','
            << (a.bits ? "bits" : "nats") << ',' << format_double(entropic_region_bound(h, a.p, a.volume)) << ','
            << format_double(entropic_mse_bound_circle(h)) << '\n';
  return kOk;
}

int run_fit(const std::string& input) {
  std::ifstream in(input);
  if (!in) throw BadInput("cannot open '" + input + "'");
  const auto fits = fit_report(read_csv(in));
  std::cout << "state,slope,r2,constant\n";
  for (const auto& [state, fit] : fits)
    std::cout << state << ',' << format_double(fit.slope) << ',' << format_double(fit.r2) << ','
              << format_double(fit.constant) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certificate-backed lower bounds for quantum parameter estimation"};
  app.require_subcommand(1);

  BetaArgs beta_args;
  auto* beta_cmd = app.add_subcommand("beta", "Optimal type-II error beta_alpha(rho, sigma)");
  beta_cmd->add_option("--rho", beta_args.rho, "Null hypothesis (state file)")->required();
  beta_cmd->add_option("--sigma", beta_args.sigma, "Alternative (state file, PSD, any trace)")->required();
  beta_cmd->add_option("--alpha", beta_args.alpha, "Required acceptance probability")->check(CLI::Range(0.0, 1.0));

  BoundArgs bound_args;
  auto* bound_cmd = app.add_subcommand("invariant-bound", "Bracket on sup over invariant states of beta_alpha");
  bound_cmd->add_option("--state", bound_args.state, "State file or builtin:<name>")->required();
  bound_cmd->add_option("--N", bound_args.n, "Size for builtin states");
  bound_cmd->add_option("--alpha", bound_args.alpha)->check(CLI::Range(0.0, 1.0));
  bound_cmd->add_option("--tol", bound_args.tol, "Relative bracket width");
  bound_cmd->add_option("--max-iter", bound_args.max_iter);
  bound_cmd->add_option("--step", bound_args.step, "diminishing or polyak");
  bound_cmd->add_flag("--strict", bound_args.strict, "Exit 3 when the bracket misses the tolerance");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Invariant bounds over builtin states and a range of N");
  sweep_cmd->add_option("--config", sweep_args.config, "key = value file; flags override it");
  sweep_cmd->add_option("--states", sweep_args.states, "Comma-separated builtin labels");
  sweep_cmd->add_option("--N-range", sweep_args.n_range, "a:b:s");
  sweep_cmd->add_option("--alpha", sweep_args.alpha);
  sweep_cmd->add_option("--tol", sweep_args.tol);
  sweep_cmd->add_option("--max-iter", sweep_args.max_iter);
  sweep_cmd->add_option("--step", sweep_args.step, "diminishing or polyak");
  sweep_cmd->add_option("--d", sweep_args.d, "Local dimension for pure-state-bound");
  sweep_cmd->add_option("--output", sweep_args.output, "CSV path (default stdout)");
  sweep_cmd->add_option("--dat", sweep_args.dat, "Plot data path (default: output with .dat)");
  sweep_cmd->add_option("--workers", sweep_args.workers);
  sweep_cmd->add_flag("--parallel", sweep_args.parallel);
  sweep_cmd->add_flag("--timing", sweep_args.timing, "Record wall time in the seconds column");
  sweep_cmd->add_flag("--verify", sweep_args.verify, "Re-check both certificates of every row");
  sweep_cmd->add_flag("--strict", sweep_args.strict);

  RepArgs rep_args;
  auto* rep_cmd = app.add_subcommand("rep-bound", "State-independent representation-theoretic bounds");
  rep_cmd->add_option("--mode", rep_args.mode)->check(CLI::IsMember({"group", "homogeneous", "mixed", "pure", "u1count"}));
  rep_cmd->add_option("--d", rep_args.d);
  rep_cmd->add_option("--N-range", rep_args.n_range, "a:b:s")->required();
  rep_cmd->add_option("--alpha", rep_args.alpha)->check(CLI::Range(0.0, 1.0));
  rep_cmd->add_option("--weights", rep_args.h, "Single-site weights for u1count, comma-separated");

  CorollaryArgs cor_args;
  auto* cor_cmd = app.add_subcommand("corollary", "Closed-form and constructive derived bounds");
  cor_cmd->add_option("--which", cor_args.which)
      ->required()
      ->check(CLI::IsMember({"mse-h", "mse-sn", "entropic", "energy", "separable", "nonlinear", "avg"}));
  auto* c_opt = cor_cmd->add_option("--C", cor_args.c, "Constant of the Heisenberg bound");
  auto* d_opt = cor_cmd->add_option("--D", cor_args.d_const, "Constant of the shot-noise bound");
  cor_cmd->add_option("--N", cor_args.n);
  cor_cmd->add_option("--H", cor_args.h, "Conditional entropy (nats)");
  cor_cmd->add_option("--p", cor_args.p, "Success probability");
  cor_cmd->add_option("--volume", cor_args.volume);
  cor_cmd->add_option("--E", cor_args.energy);
  cor_cmd->add_option("--alpha", cor_args.alpha);
  cor_cmd->add_option("--epsilon", cor_args.epsilon);
  cor_cmd->add_option("--M", cor_args.m);
  cor_cmd->add_option("--k", cor_args.k);
  cor_cmd->add_option("--site", cor_args.site, "Per-site amplitudes a,b");
  cor_cmd->add_option("--aux", cor_args.aux, "Auxiliary site amplitudes a,b");
  cor_cmd->add_option("--state", cor_args.state, "State file or builtin:<name>");

  EntropyArgs ent_args;
  auto* ent_cmd = app.add_subcommand("entropy", "H(X|B) of a covariant family and the entropic bounds");
  ent_cmd->add_option("--state", ent_args.state)->required();
  ent_cmd->add_option("--N", ent_args.n);
  ent_cmd->add_option("--volume", ent_args.volume);
  ent_cmd->add_option("--p", ent_args.p, "Success probability for the region bound");
  ent_cmd->add_flag("--bits", ent_args.bits);

  std::string fit_input;
  auto* fit_cmd = app.add_subcommand("fit", "Scaling fits of a sweep CSV");
  fit_cmd->add_option("--input", fit_input)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*beta_cmd) return run_beta(beta_args);
    if (*bound_cmd) return run_invariant_bound(bound_args);
    if (*sweep_cmd) return run_sweep_cmd(sweep_args);
    if (*rep_cmd) return run_rep_bound(rep_args);
    if (*cor_cmd) {
      cor_args.has_c = c_opt->count() > 0;
      cor_args.has_d = d_opt->count() > 0;
      return run_corollary(cor_args);
    }
    if (*ent_cmd) return run_entropy(ent_args);
    if (*fit_cmd) return run_fit(fit_input);
  } catch (const BadInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kOk;
}
