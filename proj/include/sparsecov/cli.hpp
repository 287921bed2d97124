#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sparsecov/eigensym.hpp"
#include "sparsecov/error.hpp"
#include "sparsecov/estimate.hpp"
#include "sparsecov/io.hpp"
#include "sparsecov/matcore.hpp"
#include "sparsecov/psdfix.hpp"
#include "sparsecov/simulate.hpp"
#include "sparsecov/sparsity.hpp"
#include "sparsecov/spectral.hpp"

namespace sparsecov::cli {

/// Bad flags or flag combinations; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

namespace fs = std::filesystem;
using nlohmann::json;

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string matrix_csv(const SymMatrix& m) {
  std::ostringstream os;
  write_matrix_csv(os, m);
  return os.str();
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v;
    if (!(is >> v) || !(is >> std::ws).eof()) throw UsageError(std::string("bad value in ") + what + ": '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(what) + " is empty");
  return out;
}

/// Options shared by every subcommand that applies a threshold rule.
struct RuleOptions {
  std::string rule = "fdr";
  double t = 0.0;
  double K = 1.0;
  double alpha = 0.25;
  std::string q = "auto";
  std::string level = "auto";

  void attach(CLI::App* app) {
    app->add_option("--rule", rule, "fixed | power-law | fdr | per-entry")
        ->check(CLI::IsMember({"fixed", "power-law", "fdr", "per-entry"}));
    app->add_option("--t", t, "threshold for the fixed rule");
    app->add_option("--K", K, "constant K of the power-law threshold K n^-alpha");
    app->add_option("--alpha", alpha, "exponent of the power-law threshold, in (0, 1/2)");
    app->add_option("--q", q, "FDR level, or 'auto' for 1/sqrt(p)");
    app->add_option("--level", level, "per-entry test level alpha (cutoff alpha/sqrt(p)); 'auto' means 0.05");
  }

  ThresholdRule build() const {
    auto number = [](const std::string& s, const char* flag) {
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (const std::exception&) {
        throw UsageError(std::string(flag) + " expects a number or 'auto', got '" + s + "'");
      }
    };
    ThresholdRule r;
    if (rule == "fixed") r = FixedRule{t};
    else if (rule == "power-law") r = PowerLawRule{K, alpha};
    else if (rule == "fdr") r = FdrRule{q == "auto" ? std::nullopt : std::optional<double>(number(q, "--q"))};
    else r = PerEntryRule{level == "auto" ? 0.05 : number(level, "--level")};
    try {
      validate(r);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    return r;
  }
};

inline EstimatorKind parse_kind(const std::string& s) {
  if (s == "covariance") return EstimatorKind::covariance;
  if (s == "correlation") return EstimatorKind::correlation;
  return EstimatorKind::mle;
}

/// Fills options that were not given on the command line from a JSON
/// config object. Keys are the long flag names without dashes.
inline void merge_config(CLI::App* app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config " + path + " must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = nullptr;
    try {
      opt = app->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw UsageError("config " + path + ": unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    std::vector<std::string> tokens;
    auto token = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + token(v);
      tokens.push_back(joined);
    } else {
      tokens.push_back(token(value));
    }
    try {
      opt->add_result(tokens);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config " + path + ": key '" + key + "': " + e.what());
    }
  }
}

struct PopulationOptions {
  std::string kind = "toeplitz";
  std::string coefficients = "1,0.3,0.4";
  double rho = 0.3;
  std::size_t p = 200;
  std::string matrix;

  void attach(CLI::App* app) {
    app->add_option("--population", kind, "toeplitz | power-toeplitz | e1 | e2 | csv")
        ->check(CLI::IsMember({"toeplitz", "power-toeplitz", "e1", "e2", "csv"}));
    app->add_option("--coefficients", coefficients, "leading Toeplitz coefficients, zero-padded to p");
    app->add_option("--rho", rho, "rho of the power Toeplitz matrix rho^|i-j|");
    app->add_option("--p", p, "dimension");
    app->add_option("--matrix", matrix, "population matrix CSV (with --population csv)");
  }

  SymMatrix build() const {
    if (kind == "csv") {
      if (matrix.empty()) throw UsageError("--population csv needs --matrix");
      auto in = open_input(matrix);
      return read_matrix_csv(in);
    }
    if (p < 1) throw UsageError("--p must be positive");
    if (kind == "toeplitz") {
      auto row = parse_list<double>(coefficients, "--coefficients");
      if (row.size() > p) throw UsageError("more coefficients than --p");
      row.resize(p, 0.0);
      return toeplitz(row);
    }
    if (kind == "power-toeplitz") {
      if (!(std::abs(rho) < 1.0)) throw UsageError("--rho must satisfy |rho| < 1");
      return power_toeplitz(rho, p);
    }
    if (p < 2) throw UsageError("e1/e2 need --p >= 2");
    return kind == "e1" ? e1(p) : e2(p);
  }
};

struct Context {
  std::ostream& out;
  std::ostream& err;
};

inline fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ParseError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

}  // namespace detail

/// Entry point. Returns 0 on success, 2 on usage errors and 1 on data or
/// numerical errors (with a JSON error object on `err`).
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"Sparse covariance estimation by hard thresholding"};
  app.require_subcommand(1);

  std::string out_dir;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;

  // estimate
  auto* est = app.add_subcommand("estimate", "threshold a covariance/correlation estimate of a data CSV");
  std::string data_path, kind_name = "covariance";
  bool raw_diagonal = false;
  RuleOptions est_rule;
  est->add_option("--data", data_path, "data CSV (rows are observations)")->required();
  est->add_option("--kind", kind_name, "covariance | correlation | mle")
      ->check(CLI::IsMember({"covariance", "correlation", "mle"}));
  est_rule.attach(est);
  est->add_flag("--raw-diagonal", raw_diagonal, "also threshold the diagonal (fixed and power-law rules)");
  est->add_option("--out", out_dir, "output directory")->required();

  // sparsity
  auto* spa = app.add_subcommand("sparsity", "closed-walk counts and sparsity index of a matrix's pattern");
  std::string matrix_path, ks_text = "2,4,6,8";
  double zero_tol = 1e-12;
  spa->add_option("--matrix", matrix_path, "matrix CSV")->required();
  spa->add_option("--ks", ks_text, "even walk lengths, comma separated");
  spa->add_option("--zero-tol", zero_tol, "entries with |x| <= tol are zero");
  spa->add_option("--out", out_dir, "output directory")->required();

  // spectrum
  auto* spe = app.add_subcommand("spectrum", "Weyl gap and eigenspace angles between two matrices");
  std::string a_path, b_path, j_text = "1";
  spe->add_option("--a", a_path, "reference (population) matrix CSV")->required();
  spe->add_option("--b", b_path, "estimate matrix CSV")->required();
  spe->add_option("--J", j_text, "1-based eigenvalue indices (descending order), comma separated");
  spe->add_option("--out", out_dir, "output directory")->required();

  // repair
  auto* rep = app.add_subcommand("repair", "make a symmetric matrix positive semidefinite");
  std::string method = "shift";
  double floor_value = 0.0;
  rep->add_option("--matrix", matrix_path, "matrix CSV")->required();
  rep->add_option("--method", method, "truncate | shift")->check(CLI::IsMember({"truncate", "shift"}));
  rep->add_option("--floor", floor_value, "eigenvalue floor g(p) >= 0 for truncate");
  rep->add_option("--out", out_dir, "output directory")->required();

  // simulate-scree
  auto* scr = app.add_subcommand("simulate-scree", "Monte Carlo scree bands for raw and thresholded estimators");
  PopulationOptions pop;
  RuleOptions scr_rule;
  std::size_t n = 200, reps = 200;
  std::string quantiles_text = "0.025,0.975", config_path, scr_kind = "covariance";
  pop.attach(scr);
  scr_rule.attach(scr);
  scr->add_option("--kind", scr_kind, "covariance | correlation | mle")
      ->check(CLI::IsMember({"covariance", "correlation", "mle"}));
  scr->add_option("--n", n, "samples per repetition");
  scr->add_option("--reps", reps, "repetitions");
  scr->add_option("--quantiles", quantiles_text, "lower,upper band quantiles");
  scr->add_option("--seed", seed, "64-bit seed (required)");
  scr->add_option("--threads", threads, "worker threads, 0 = all cores");
  scr->add_option("--config", config_path, "JSON config; command-line flags take precedence");
  scr->add_option("--out", out_dir, "output directory");

  // simulate-counterexample
  auto* cex = app.add_subcommand("simulate-counterexample", "oracle estimation of the half-sparse arrow matrix");
  std::size_t cex_n = 300, cex_p = 300, cex_reps = 200;
  std::string cex_config;
  cex->add_option("--n", cex_n, "samples per repetition");
  cex->add_option("--p", cex_p, "dimension");
  cex->add_option("--reps", cex_reps, "repetitions");
  cex->add_option("--seed", seed, "64-bit seed (required)");
  cex->add_option("--threads", threads, "worker threads, 0 = all cores");
  cex->add_option("--config", cex_config, "JSON config; command-line flags take precedence");
  cex->add_option("--out", out_dir, "output directory");

  Context ctx{out, err};
  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    if (*est) {
      const ThresholdRule rule = est_rule.build();
      auto in = open_input(data_path);
      const DataMatrix x = read_data_csv(in);
      EstimateReport report;
      if (raw_diagonal) {
        if (!std::holds_alternative<FixedRule>(rule) && !std::holds_alternative<PowerLawRule>(rule))
          throw UsageError("--raw-diagonal applies to the fixed and power-law rules only");
        const double t = std::holds_alternative<FixedRule>(rule)
                             ? std::get<FixedRule>(rule).t
                             : std::get<PowerLawRule>(rule).K *
                                   std::pow(static_cast<double>(x.n()), -std::get<PowerLawRule>(rule).alpha);
        report = hard_threshold(estimator(x, parse_kind(kind_name)), t, false);
        report.rule = rule;
        report.n = x.n();
      } else {
        report = estimate_with_rule(x, parse_kind(kind_name), rule);
      }
      const auto dir = prepare_out(out_dir);
      write_text(dir / "estimate.csv", matrix_csv(report.estimate));
      write_text(dir / "estimate.json", dump(estimate_sidecar(report)));
      ctx.out << (dir / "estimate.csv").string() << '\n' << (dir / "estimate.json").string() << '\n';
    } else if (*spa) {
      const auto ks = parse_list<int>(ks_text, "--ks");
      for (int k : ks)
        if (k < 2 || k % 2 != 0) throw UsageError("--ks entries must be even and >= 2");
      if (!(zero_tol >= 0.0)) throw UsageError("--zero-tol must be nonnegative");
      auto in = open_input(matrix_path);
      const SymMatrix m = read_matrix_csv(in);
      const auto dir = prepare_out(out_dir);
      write_text(dir / "sparsity.json", dump(sparsity_json(beta_index(adjacency(m, zero_tol), ks))));
      ctx.out << (dir / "sparsity.json").string() << '\n';
    } else if (*spe) {
      auto ia = open_input(a_path);
      auto ib = open_input(b_path);
      const SymMatrix a = read_matrix_csv(ia);
      const SymMatrix b = read_matrix_csv(ib);
      if (a.dim() != b.dim()) throw DimensionMismatch("spectrum: matrices have different dimensions");
      std::vector<std::size_t> idx;
      for (long j : parse_list<long>(j_text, "--J")) {
        if (j < 1 || static_cast<std::size_t>(j) > a.dim()) throw UsageError("--J index out of range");
        idx.push_back(static_cast<std::size_t>(j - 1));
      }
      std::sort(idx.begin(), idx.end());
      if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) throw UsageError("--J has duplicate indices");

      const auto ea = eigensym(a);
      const auto eb = eigensym(b);
      CanonicalAngleReport angles = canonical_angles(eigen_columns(ea, idx), eigen_columns(eb, idx));
      std::vector<double> mvals;
      for (std::size_t i : idx) mvals.push_back(eb.values[i]);
      const double lo = *std::min_element(mvals.begin(), mvals.end());
      const double hi = *std::max_element(mvals.begin(), mvals.end());
      std::optional<double> delta;
      for (std::size_t i = 0; i < a.dim(); ++i) {
        if (std::binary_search(idx.begin(), idx.end(), i)) continue;
        const double l = ea.values[i];
        const double d = l < lo ? lo - l : (l > hi ? l - hi : 0.0);
        delta = delta ? std::min(*delta, d) : d;
      }
      if (!delta) delta = std::numeric_limits<double>::infinity();
      if (*delta > 0.0 && std::isfinite(*delta))
        angles.dk_bound = davis_kahan(a, eigen_columns(eb, idx), diagonal_matrix(mvals), *delta);
      else if (std::isinf(*delta))
        angles.dk_bound = 0.0;

      json j;
      j["J"] = json::array();
      for (std::size_t i : idx) j["J"].push_back(i + 1);
      j["weyl"] = weyl_json(weyl_check(a, b));
      j["delta"] = std::isfinite(*delta) ? json(*delta) : json(nullptr);
      j["angles"] = angles_json(angles);
      const auto dir = prepare_out(out_dir);
      write_text(dir / "spectrum.json", dump(j));
      ctx.out << (dir / "spectrum.json").string() << '\n';
    } else if (*rep) {
      if (!(floor_value >= 0.0)) throw UsageError("--floor must be nonnegative");
      if (method == "shift" && floor_value != 0.0) throw UsageError("--floor applies to --method truncate only");
      auto in = open_input(matrix_path);
      const SymMatrix m = read_matrix_csv(in);
      const SymMatrix fixed = method == "shift" ? repair_shift(m) : repair_truncate(m, floor_value);
      json j;
      j["method"] = method;
      j["floor"] = floor_value;
      j["lambda_min_before"] = eigenvalues(m).back();
      j["lambda_min_after"] = eigenvalues(fixed).back();
      j["op_norm_change"] = operator_norm(fixed - m);
      const auto dir = prepare_out(out_dir);
      write_text(dir / "repaired.csv", matrix_csv(fixed));
      write_text(dir / "repair.json", dump(j));
      ctx.out << (dir / "repaired.csv").string() << '\n' << (dir / "repair.json").string() << '\n';
    } else if (*scr) {
      if (!config_path.empty()) merge_config(scr, config_path);
      if (!seed) throw UsageError("--seed is required");
      if (out_dir.empty()) throw UsageError("--out is required");
      const auto q = parse_list<double>(quantiles_text, "--quantiles");
      if (q.size() != 2) throw UsageError("--quantiles expects two values");
      SimulationConfig cfg;
      cfg.population = pop.build();
      cfg.n = n;
      cfg.reps = reps;
      cfg.rule = scr_rule.build();
      cfg.kind = parse_kind(scr_kind);
      cfg.seed = *seed;
      cfg.quantiles = {q[0], q[1]};
      cfg.threads = threads;
      if (cfg.n < 2 || (cfg.n < 3 && (std::holds_alternative<FdrRule>(cfg.rule) ||
                                       std::holds_alternative<PerEntryRule>(cfg.rule))))
        throw UsageError("--n too small for the chosen rule");
      if (cfg.reps < 1) throw UsageError("--reps must be at least 1");
      if (!(q[0] > 0.0 && q[1] < 1.0 && q[0] <= q[1])) throw UsageError("--quantiles must lie in (0, 1), lower first");
      const SimulationSummary s = scree_experiment(cfg);
      std::ostringstream csv;
      write_scree_csv(csv, s);
      const auto dir = prepare_out(out_dir);
      write_text(dir / "scree.csv", csv.str());
      write_text(dir / "scree.json", dump(scree_sidecar(s, cfg)));
      ctx.out << (dir / "scree.csv").string() << '\n' << (dir / "scree.json").string() << '\n';
    } else if (*cex) {
      if (!cex_config.empty()) merge_config(cex, cex_config);
      if (!seed) throw UsageError("--seed is required");
      if (out_dir.empty()) throw UsageError("--out is required");
      if (cex_p < 3 || cex_n < 3) throw UsageError("--n and --p must be at least 3");
      if (cex_reps < 1) throw UsageError("--reps must be at least 1");
      const auto s = counterexample_experiment(cex_n, cex_p, cex_reps, *seed, threads);
      const auto dir = prepare_out(out_dir);
      write_text(dir / "counterexample.json", dump(counterexample_json(s, *seed)));
      ctx.out << (dir / "counterexample.json").string() << '\n';
    }
    return 0;
  } catch (const UsageError& e) {
    ctx.err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    ctx.err << json{{"error", e.code()}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    ctx.err << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
}

}  // namespace sparsecov::cli
