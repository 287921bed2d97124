#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "sparsecov/error.hpp"
#include "sparsecov/matrix.hpp"
#include "sparsecov/sparsity.hpp"

namespace sparsecov {

/// n x p observations; row i is sample i. Entries are finite.
class DataMatrix {
 public:
  DataMatrix() = default;

  explicit DataMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1)
      throw InvalidArgument("DataMatrix: need at least one row and one column");
    for (double x : values_.data())
      if (!std::isfinite(x)) throw InvalidArgument("DataMatrix: non-finite entry");
  }

  std::size_t n() const noexcept { return values_.rows(); }
  std::size_t p() const noexcept { return values_.cols(); }
  double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }
  const Matrix& values() const noexcept { return values_; }

  friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

 private:
  Matrix values_;
};

// Threshold selection rules.

struct FixedRule {
  double t = 0.0;
};

/// Threshold K n^(-alpha).
struct PowerLawRule {
  double K = 1.0;
  double alpha = 0.25;
};

/// Keep entries rejected by Benjamini-Hochberg at level q over the
/// upper-triangle p-values. An empty q means 1/sqrt(p).
struct FdrRule {
  std::optional<double> q;
};

/// Keep entries whose p-value is at most level / sqrt(p).
struct PerEntryRule {
  double level = 0.05;
};

using ThresholdRule = std::variant<FixedRule, PowerLawRule, FdrRule, PerEntryRule>;

inline void validate(const ThresholdRule& rule) {
  std::visit(
      [](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, FixedRule>) {
          if (!(r.t >= 0.0) || !std::isfinite(r.t)) throw InvalidArgument("fixed rule: t must be a finite nonnegative value");
        } else if constexpr (std::is_same_v<R, PowerLawRule>) {
          if (!(r.K > 0.0) || !std::isfinite(r.K)) throw InvalidArgument("power-law rule: K must be positive");
          if (!(r.alpha > 0.0 && r.alpha < 0.5)) throw InvalidArgument("power-law rule: alpha must lie in (0, 1/2)");
        } else if constexpr (std::is_same_v<R, FdrRule>) {
          if (r.q && !(*r.q > 0.0 && *r.q < 1.0)) throw InvalidArgument("fdr rule: q must lie in (0, 1)");
        } else {
          if (!(r.level > 0.0 && r.level < 1.0)) throw InvalidArgument("per-entry rule: level must lie in (0, 1)");
        }
      },
      rule);
}

inline std::string rule_name(const ThresholdRule& rule) {
  static constexpr const char* names[] = {"fixed", "power-law", "fdr", "per-entry"};
  return names[rule.index()];
}

enum class EstimatorKind { covariance, correlation, mle };

struct EstimateReport {
  SymMatrix estimate;
  AdjacencyMatrix support;
  ThresholdRule rule;
  /// Threshold actually applied. For the test-based rules this is the
  /// smallest kept off-diagonal |entry|, empty when none survives.
  std::optional<double> realized_threshold;
  std::size_t n = 0;
  std::size_t p = 0;
};

// Estimators.

namespace detail {

inline std::vector<double> column_means(const DataMatrix& x) {
  std::vector<double> mean(x.p(), 0.0);
  for (std::size_t i = 0; i < x.n(); ++i) {
    const auto r = x.values().row(i);
    for (std::size_t j = 0; j < x.p(); ++j) mean[j] += r[j];
  }
  for (double& m : mean) m /= static_cast<double>(x.n());
  return mean;
}

/// p x n matrix whose row j is column j of X minus `shift[j]`.
inline Matrix shifted_columns(const DataMatrix& x, const std::vector<double>& shift) {
  Matrix c(x.p(), x.n());
  for (std::size_t i = 0; i < x.n(); ++i)
    for (std::size_t j = 0; j < x.p(); ++j) c(j, i) = x(i, j) - shift[j];
  return c;
}

/// (1/divisor) sum_l c_jl c_kl for every pair of rows of `cols`.
inline SymMatrix cross_products(const Matrix& cols, double divisor) {
  const std::size_t p = cols.rows();
  SymMatrix s(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto a = cols.row(j);
    for (std::size_t k = j; k < p; ++k) {
      const auto b = cols.row(k);
      double acc = 0.0;
      for (std::size_t l = 0; l < a.size(); ++l) acc += a[l] * b[l];
      s.set(j, k, acc / divisor);
    }
  }
  return s;
}

}  // namespace detail

/// (1/n) sum_i X_i X_iᵀ, no centering.
inline SymMatrix mle_covariance(const DataMatrix& x) {
  const std::vector<double> zero(x.p(), 0.0);
  return detail::cross_products(detail::shifted_columns(x, zero), static_cast<double>(x.n()));
}

/// Centered covariance with divisor n - 1.
inline SymMatrix sample_covariance(const DataMatrix& x) {
  if (x.n() < 2) throw InvalidArgument("sample_covariance: need n >= 2");
  return detail::cross_products(detail::shifted_columns(x, detail::column_means(x)),
                                static_cast<double>(x.n() - 1));
}

/// D^(-1/2) S D^(-1/2) with S the sample covariance. Diagonal is exactly 1.
inline SymMatrix sample_correlation(const DataMatrix& x) {
  const SymMatrix s = sample_covariance(x);
  const std::size_t p = s.dim();
  for (std::size_t j = 0; j < p; ++j)
    if (!(s(j, j) > 0.0)) throw ZeroVariance(j);
  // s_jj * s_kk is symmetric in (j, k), so relabeling columns permutes the
  // result exactly.
  SymMatrix r(p);
  for (std::size_t j = 0; j < p; ++j) {
    r.set(j, j, 1.0);
    for (std::size_t k = j + 1; k < p; ++k)
      r.set(j, k, std::clamp(s(j, k) / std::sqrt(s(j, j) * s(k, k)), -1.0, 1.0));
  }
  return r;
}

inline SymMatrix estimator(const DataMatrix& x, EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::covariance: return sample_covariance(x);
    case EstimatorKind::correlation: return sample_correlation(x);
    case EstimatorKind::mle: return mle_covariance(x);
  }
  throw InvalidArgument("unknown estimator kind");
}

// Thresholding.

/// Keeps x when |x| >= t, zeroes it otherwise. The diagonal is left alone
/// when `preserve_diagonal` is set.
inline EstimateReport hard_threshold(const SymMatrix& m, double t, bool preserve_diagonal = true) {
  if (!(t >= 0.0)) throw InvalidArgument("hard_threshold: t must be nonnegative");
  const std::size_t p = m.dim();
  SymMatrix out(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      const double x = m(i, j);
      const bool keep = (i == j && preserve_diagonal) || std::abs(x) >= t;
      out.set(i, j, keep ? x : 0.0);
    }
  AdjacencyMatrix support = adjacency(out, 0.0);
  return {std::move(out), std::move(support), FixedRule{t}, t, 0, p};
}

/// M(i, j) where the support bit is set, zero elsewhere.
inline SymMatrix oracle_threshold(const SymMatrix& m, const AdjacencyMatrix& support) {
  if (support.dim() != m.dim()) throw DimensionMismatch("oracle_threshold: support dimension differs");
  SymMatrix out(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = i; j < m.dim(); ++j)
      if (support(i, j)) out.set(i, j, m(i, j));
  return out;
}

// Entrywise tests.

/// Two-sided standard normal tail probability 2 (1 - Phi(|z|)).
inline double two_sided_normal_pvalue(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

struct PValueGrid {
  /// Symmetric p x p grid; diagonal entries are 0 (never tested).
  Matrix values;
  /// Pairs (i < j) whose centered cross-products had zero spread.
  std::vector<std::pair<std::size_t, std::size_t>> degenerate_pairs;
};

/// z-test of each off-diagonal covariance against zero. With
/// w_l = (X_li - mean_i)(X_lj - mean_j), z = sqrt(n) mean(w) / sd(w), sd
/// using divisor n - 1. When sd(w) = 0 the p-value is 0 if mean(w) != 0
/// and 1 otherwise, and the pair is listed as degenerate.
inline PValueGrid entry_pvalues(const DataMatrix& x) {
  if (x.n() < 3) throw InvalidArgument("entry_pvalues: need n >= 3");
  const std::size_t n = x.n();
  const std::size_t p = x.p();
  const Matrix c = detail::shifted_columns(x, detail::column_means(x));
  PValueGrid out{Matrix(p, p, 0.0), {}};
  const double nd = static_cast<double>(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < p; ++i) {
    const auto a = c.row(i);
    for (std::size_t j = i + 1; j < p; ++j) {
      const auto b = c.row(j);
      double sum = 0.0;
      for (std::size_t l = 0; l < n; ++l) sum += (w[l] = a[l] * b[l]);
      const double mean = sum / nd;
      double ss = 0.0;
      for (std::size_t l = 0; l < n; ++l) ss += (w[l] - mean) * (w[l] - mean);
      const double sd = std::sqrt(ss / (nd - 1.0));
      double pv;
      if (sd == 0.0) {
        pv = mean != 0.0 ? 0.0 : 1.0;
        out.degenerate_pairs.emplace_back(i, j);
      } else {
        pv = two_sided_normal_pvalue(std::sqrt(nd) * mean / sd);
      }
      out.values(i, j) = out.values(j, i) = pv;
    }
  }
  return out;
}

/// Benjamini-Hochberg step-up procedure. Returns the rejected indices in
/// increasing index order.
inline std::vector<std::size_t> benjamini_hochberg(const std::vector<double>& pvals, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("benjamini_hochberg: q must lie in (0, 1]");
  for (double v : pvals)
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("benjamini_hochberg: p-values must lie in [0, 1]");
  const std::size_t m = pvals.size();
  std::vector<double> sorted = pvals;
  std::sort(sorted.begin(), sorted.end());
  std::size_t k_star = 0;
  for (std::size_t k = m; k >= 1; --k) {
    if (sorted[k - 1] <= q * static_cast<double>(k) / static_cast<double>(m)) {
      k_star = k;
      break;
    }
  }
  std::vector<std::size_t> rejected;
  if (k_star == 0) return rejected;
  const double cutoff = sorted[k_star - 1];
  for (std::size_t i = 0; i < m; ++i)
    if (pvals[i] <= cutoff) rejected.push_back(i);
  return rejected;
}

inline double fdr_level(const FdrRule& rule, std::size_t p) {
  return rule.q.value_or(1.0 / std::sqrt(static_cast<double>(p)));
}

/// Thresholds `raw`, an estimator computed from X, under `rule`. The
/// test-based rules draw their p-values from X. The diagonal is always kept.
inline EstimateReport apply_rule(const DataMatrix& x, const SymMatrix& raw, const ThresholdRule& rule) {
  validate(rule);
  if (raw.dim() != x.p()) throw DimensionMismatch("apply_rule: estimator and data dimensions differ");
  const std::size_t p = raw.dim();

  auto from_keep = [&](auto&& keep) {
    SymMatrix out(p);
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p; ++i) {
      out.set(i, i, raw(i, i));
      for (std::size_t j = i + 1; j < p; ++j)
        if (keep(i, j)) {
          out.set(i, j, raw(i, j));
          smallest = std::min(smallest, std::abs(raw(i, j)));
        }
    }
    AdjacencyMatrix support = adjacency(out, 0.0);
    for (std::size_t i = 0; i < p; ++i) support.set(i, i, true);
    std::optional<double> realized;
    if (std::isfinite(smallest)) realized = smallest;
    return EstimateReport{std::move(out), std::move(support), rule, realized, x.n(), p};
  };

  return std::visit(
      [&](const auto& r) -> EstimateReport {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, FixedRule> || std::is_same_v<R, PowerLawRule>) {
          double t;
          if constexpr (std::is_same_v<R, FixedRule>) t = r.t;
          else t = r.K * std::pow(static_cast<double>(x.n()), -r.alpha);
          EstimateReport rep = hard_threshold(raw, t, true);
          for (std::size_t i = 0; i < p; ++i) rep.support.set(i, i, true);
          rep.rule = rule;
          rep.n = x.n();
          return rep;
        } else {
          if (x.n() < 3) throw InvalidArgument("estimate_with_rule: test-based rules need n >= 3");
          const PValueGrid grid = entry_pvalues(x);
          if constexpr (std::is_same_v<R, FdrRule>) {
            std::vector<double> upper;
            upper.reserve(p * (p - 1) / 2);
            for (std::size_t i = 0; i < p; ++i)
              for (std::size_t j = i + 1; j < p; ++j) upper.push_back(grid.values(i, j));
            std::vector<std::uint8_t> keep(upper.size(), 0);
            if (!upper.empty())
              for (std::size_t idx : benjamini_hochberg(upper, fdr_level(r, p))) keep[idx] = 1;
            // Upper-triangle index of (i, j), i < j, in row-major order.
            auto flat = [p](std::size_t i, std::size_t j) { return i * (2 * p - i - 1) / 2 + (j - i - 1); };
            return from_keep([&](std::size_t i, std::size_t j) { return keep[flat(i, j)] != 0; });
          } else {
            const double cut = r.level / std::sqrt(static_cast<double>(p));
            return from_keep([&](std::size_t i, std::size_t j) { return grid.values(i, j) <= cut; });
          }
        }
      },
      rule);
}

/// Builds the estimator of the given kind from X and thresholds it under
/// `rule`.
inline EstimateReport estimate_with_rule(const DataMatrix& x, EstimatorKind kind, const ThresholdRule& rule) {
  validate(rule);
  if (x.n() < 2) throw InvalidArgument("estimate_with_rule: need n >= 2");
  return apply_rule(x, estimator(x, kind), rule);
}

}  // namespace sparsecov
