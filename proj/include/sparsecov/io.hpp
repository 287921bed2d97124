#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparsecov/error.hpp"
#include "sparsecov/estimate.hpp"
#include "sparsecov/matrix.hpp"
#include "sparsecov/simulate.hpp"
#include "sparsecov/sparsity.hpp"
#include "sparsecov/spectral.hpp"

namespace sparsecov {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kQuantileConvention = "type7-linear-interpolation";

// CSV.

/// 17 significant digits: round-trips every double.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool parse_number(std::string_view field, double& out) {
  const std::string s(trim(field));
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

/// Reads numeric rows. When `allow_header` is set, a first line with any
/// non-numeric field is skipped.
inline Matrix read_numeric_rows(std::istream& in, bool allow_header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size(); ++j) numeric = numeric && parse_number(fields[j], row[j]);
    if (!numeric) {
      if (allow_header && rows.empty() && line_no == 1) continue;
      throw ParseError("csv line " + std::to_string(line_no) + ": non-numeric field");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("csv line " + std::to_string(line_no) + ": expected " +
                       std::to_string(rows.front().size()) + " fields, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("csv: no data rows");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace detail

/// Matrix CSV: no header, one row per line. Symmetry is checked to `tol`
/// and mirrored pairs are averaged.
inline SymMatrix read_matrix_csv(std::istream& in, double tol = 1e-9) {
  return SymMatrix::from_full(detail::read_numeric_rows(in, false), tol);
}

/// Data CSV: one observation per line, optional non-numeric header line.
inline DataMatrix read_data_csv(std::istream& in) { return DataMatrix(detail::read_numeric_rows(in, true)); }

inline void write_matrix_csv(std::ostream& out, const SymMatrix& m) {
  for (std::size_t i = 0; i < m.dim(); ++i) {
    for (std::size_t j = 0; j < m.dim(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

/// One row per eigenvalue index (1-based).
inline void write_scree_csv(std::ostream& out, const SimulationSummary& s) {
  out << "index,population,thresholded_lower,thresholded_upper,raw_lower,raw_upper\n";
  for (std::size_t i = 0; i < s.bands.size(); ++i) {
    const auto& b = s.bands[i];
    out << (i + 1) << ',' << format_double(b.population) << ',' << format_double(b.thresholded_lower) << ','
        << format_double(b.thresholded_upper) << ',' << format_double(b.raw_lower) << ','
        << format_double(b.raw_upper) << '\n';
  }
}

// JSON.

using nlohmann::json;

inline json rule_json(const ThresholdRule& rule) {
  json j{{"name", rule_name(rule)}};
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, FixedRule>) {
          j["t"] = r.t;
        } else if constexpr (std::is_same_v<R, PowerLawRule>) {
          j["K"] = r.K;
          j["alpha"] = r.alpha;
        } else if constexpr (std::is_same_v<R, FdrRule>) {
          j["q"] = r.q ? json(*r.q) : json("auto");
        } else {
          j["level"] = r.level;
        }
      },
      rule);
  return j;
}

inline json provenance_json(std::optional<std::uint64_t> seed, const std::optional<ThresholdRule>& rule) {
  json j;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["rule"] = rule ? rule_json(*rule) : json(nullptr);
  j["version"] = kVersion;
  j["quantile_convention"] = kQuantileConvention;
  j["rng"] = "splitmix64-counter/polar-normal";
  j["pvalue_test"] = "z-test, empirical sd of centered cross-products";
  return j;
}

inline json estimate_sidecar(const EstimateReport& r) {
  const std::size_t nnz = r.support.count();
  json j;
  j["n"] = r.n;
  j["p"] = r.p;
  j["rule"] = rule_json(r.rule);
  if (const auto* fdr = std::get_if<FdrRule>(&r.rule)) j["rule"]["q_resolved"] = fdr_level(*fdr, r.p);
  if (const auto* pe = std::get_if<PerEntryRule>(&r.rule))
    j["rule"]["cutoff"] = pe->level / std::sqrt(static_cast<double>(r.p));
  j["realized_threshold"] = r.realized_threshold ? json(*r.realized_threshold) : json(nullptr);
  j["nnz"] = nnz;
  j["support_density"] = static_cast<double>(nnz) / static_cast<double>(r.p * r.p);
  j["provenance"] = provenance_json(std::nullopt, r.rule);
  return j;
}

inline json sparsity_json(const SparsityReport& report) {
  json arr = json::array();
  for (const auto& rec : report) arr.push_back({{"k", rec.k}, {"phi", to_decimal(rec.phi)}, {"beta_hat", rec.beta_hat}});
  return arr;
}

inline json angles_json(const CanonicalAngleReport& r) {
  json j{{"cosines", r.cosines}, {"sines", r.sines}, {"max_sin", r.max_sin}};
  j["dk_bound"] = r.dk_bound ? json(*r.dk_bound) : json(nullptr);
  return j;
}

inline json weyl_json(const WeylResult& w) { return {{"max_gap", w.max_gap}, {"norm_diff", w.norm_diff}}; }

inline json quantile_stats_json(const QuantileStats& q) {
  return {{"median", q.median}, {"lower", q.lower}, {"upper", q.upper}};
}

inline json scree_sidecar(const SimulationSummary& s, const SimulationConfig& c) {
  json j;
  j["n"] = c.n;
  j["p"] = c.population.dim();
  j["reps"] = s.reps;
  j["quantiles"] = {c.quantiles.first, c.quantiles.second};
  j["thresholded_error"] = quantile_stats_json(s.thresholded_error);
  j["raw_error"] = quantile_stats_json(s.raw_error);
  j["median_precision"] = s.median_precision;
  j["median_recall"] = s.median_recall;
  j["provenance"] = provenance_json(c.seed, c.rule);
  return j;
}

inline json counterexample_json(const CounterexampleSummary& s, std::uint64_t seed) {
  json j;
  j["n"] = s.n;
  j["p"] = s.p;
  j["reps"] = s.reps;
  j["mean_lambda1_sq"] = s.mean_lambda1_sq;
  j["var_lambda1_sq"] = s.var_lambda1_sq;
  j["median_lambda1"] = s.median_lambda1;
  j["mean_abs_cos"] = s.mean_abs_cos;
  j["mean_lambda_plus_hat"] = s.mean_lambda_plus_hat;
  j["theory"] = {{"expected_lambda1_sq", s.expected_lambda1_sq},
                 {"limit_abs_cos", s.limit_abs_cos},
                 {"limit_lambda_plus", s.limit_lambda_plus}};
  j["max_norm_crosscheck"] = s.max_norm_crosscheck;
  j["max_lambda_plus_crosscheck"] = s.max_lambda_plus_crosscheck;
  j["provenance"] = provenance_json(seed, std::nullopt);
  return j;
}

}  // namespace sparsecov
