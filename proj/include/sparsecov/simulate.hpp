#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "sparsecov/eigensym.hpp"
#include "sparsecov/error.hpp"
#include "sparsecov/estimate.hpp"
#include "sparsecov/matcore.hpp"
#include "sparsecov/random.hpp"
#include "sparsecov/sparsity.hpp"

namespace sparsecov {

// Sampling.

/// n rows L z with L the Cholesky factor of `l`'s matrix and z i.i.d.
/// standard normal from the generator keyed by `seed`.
inline DataMatrix gaussian_sample(const LowerTriangular& l, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("gaussian_sample: n must be positive");
  const std::size_t p = l.dim();
  CounterRng rng(seed);
  Matrix x(n, p);
  std::vector<double> z(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : z) v = rng.normal();
    l.apply(z, x.row(i));
  }
  return DataMatrix(std::move(x));
}

/// Draws n samples from N(0, Sigma). Throws NotPositiveDefinite when Sigma
/// cannot be factored.
inline DataMatrix gaussian_sample(const SymMatrix& sigma, std::size_t n, std::uint64_t seed) {
  return gaussian_sample(cholesky(sigma), n, seed);
}

// Order statistics.

/// Linear interpolation between order statistics (type 7). `sorted` must
/// be ascending and nonempty.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile: empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, q);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

// Parallel repetitions.

/// Runs body(r) for r in [0, reps) on up to `threads` workers (0 means all
/// hardware threads). Results land in rep-index order; the first exception
/// thrown by any repetition is rethrown.
template <class Result>
std::vector<Result> run_repetitions(std::size_t reps, unsigned threads,
                                    const std::function<Result(std::size_t)>& body) {
  std::vector<Result> out(reps);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(reps, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < reps;) {
      try {
        out[r] = body(r);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = reps;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

// Scree experiment.

struct SimulationConfig {
  SymMatrix population;
  std::size_t n = 200;
  std::size_t reps = 200;
  ThresholdRule rule = FdrRule{};
  EstimatorKind kind = EstimatorKind::covariance;
  std::uint64_t seed = 0;
  std::pair<double, double> quantiles{0.025, 0.975};
  /// Worker threads; 0 means all hardware threads. Does not affect results.
  unsigned threads = 0;
};

struct ScreeBand {
  double population;
  double thresholded_lower, thresholded_upper;
  double raw_lower, raw_upper;
};

struct QuantileStats {
  double median;
  double lower;
  double upper;
};

struct SimulationSummary {
  std::vector<ScreeBand> bands;
  QuantileStats thresholded_error;  ///< of ||Sigma_hat - Sigma||_2
  QuantileStats raw_error;          ///< of ||S - Sigma||_2
  double median_precision;
  double median_recall;
  std::size_t reps;
};

namespace detail {

struct ScreeRep {
  std::vector<double> raw_eigs;
  std::vector<double> thr_eigs;
  double raw_error = 0.0;
  double thr_error = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

inline SymMatrix correlation_of(const SymMatrix& s) {
  SymMatrix r(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i)
    for (std::size_t j = i; j < s.dim(); ++j)
      r.set(i, j, i == j ? 1.0 : s(i, j) / std::sqrt(s(i, i) * s(j, j)));
  return r;
}

inline QuantileStats quantile_stats(std::vector<double> v, std::pair<double, double> q) {
  std::sort(v.begin(), v.end());
  return {quantile_sorted(v, 0.5), quantile_sorted(v, q.first), quantile_sorted(v, q.second)};
}

}  // namespace detail

/// Monte Carlo scree bands for the raw and thresholded estimators.
///
/// Repetition r samples with seed derive_seed(config.seed, r). Per index i
/// of the descending spectrum the configured quantiles of the estimated
/// eigenvalues are reported. The target for correlation estimators is the
/// population correlation matrix.
inline SimulationSummary scree_experiment(const SimulationConfig& config) {
  if (config.n < 2) throw InvalidArgument("scree_experiment: n must be at least 2");
  if (config.reps < 1) throw InvalidArgument("scree_experiment: reps must be at least 1");
  const auto [q_lo, q_hi] = config.quantiles;
  if (!(q_lo > 0.0 && q_lo < 1.0 && q_hi > 0.0 && q_hi < 1.0 && q_lo <= q_hi))
    throw InvalidArgument("scree_experiment: quantiles must lie in (0, 1) with lower <= upper");
  validate(config.rule);

  const LowerTriangular factor = cholesky(config.population);
  const SymMatrix target =
      config.kind == EstimatorKind::correlation ? detail::correlation_of(config.population) : config.population;
  const AdjacencyMatrix truth = adjacency(target, 1e-12);
  const std::size_t p = target.dim();

  const std::function<detail::ScreeRep(std::size_t)> body = [&](std::size_t r) {
    const DataMatrix x = gaussian_sample(factor, config.n, derive_seed(config.seed, r));
    const SymMatrix raw = estimator(x, config.kind);
    const EstimateReport thr = apply_rule(x, raw, config.rule);
    detail::ScreeRep rep;
    rep.raw_eigs = eigenvalues(raw);
    rep.thr_eigs = eigenvalues(thr.estimate);
    rep.raw_error = operator_norm(raw - target);
    rep.thr_error = operator_norm(thr.estimate - target);
    const SupportMetrics sm = support_metrics(thr.support, truth, true);
    rep.precision = sm.precision;
    rep.recall = sm.recall;
    return rep;
  };
  const auto reps = run_repetitions<detail::ScreeRep>(config.reps, config.threads, body);

  SimulationSummary out;
  out.reps = config.reps;
  const auto pop = eigenvalues(target);
  std::vector<double> raw_i(config.reps), thr_i(config.reps);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t r = 0; r < config.reps; ++r) {
      raw_i[r] = reps[r].raw_eigs[i];
      thr_i[r] = reps[r].thr_eigs[i];
    }
    std::sort(raw_i.begin(), raw_i.end());
    std::sort(thr_i.begin(), thr_i.end());
    out.bands.push_back({pop[i], quantile_sorted(thr_i, q_lo), quantile_sorted(thr_i, q_hi),
                         quantile_sorted(raw_i, q_lo), quantile_sorted(raw_i, q_hi)});
  }
  std::vector<double> thr_err, raw_err, prec, rec;
  for (const auto& rep : reps) {
    thr_err.push_back(rep.thr_error);
    raw_err.push_back(rep.raw_error);
    prec.push_back(rep.precision);
    rec.push_back(rep.recall);
  }
  out.thresholded_error = detail::quantile_stats(thr_err, config.quantiles);
  out.raw_error = detail::quantile_stats(raw_err, config.quantiles);
  out.median_precision = median(prec);
  out.median_recall = median(rec);
  return out;
}

// Half-sparse counterexample.

struct CounterexampleSummary {
  std::size_t n, p, reps;
  double mean_lambda1_sq;
  double var_lambda1_sq;
  double median_lambda1;
  double mean_abs_cos;        ///< mean |<u+, u+_hat>|
  double mean_lambda_plus_hat;
  double expected_lambda1_sq;  ///< (p - 1 + sum alpha_i^2) / (n - 1)
  double limit_abs_cos;        ///< (1 + 1 / sqrt(1 + p/n)) / 2
  double limit_lambda_plus;    ///< sqrt(1 + p/n)
  double max_norm_crosscheck;  ///< max |closed-form lambda1 - operator_norm|
  double max_lambda_plus_crosscheck;  ///< max |closed-form lambda+_hat - (top eigenvalue - 1)|
};

namespace detail {

struct CounterexampleRep {
  double lambda1_sq = 0.0;
  double abs_cos = 0.0;
  double lambda_plus_hat = 0.0;
  double crosscheck = 0.0;
  double residual = 0.0;
};

}  // namespace detail

/// Oracle estimation of the arrow matrix with alpha_i = 1/sqrt(p).
///
/// Each repetition keeps the known unit diagonal, takes the first row and
/// column from the sample covariance and zeroes the rest. The operator-norm
/// error lambda1 = sqrt(sum (alpha_i - alpha_hat_i)^2) is computed in closed
/// form and checked against a numerical operator norm; lambda+_hat likewise
/// against the top eigenvalue of Sigma_hat. The leading
/// eigenvectors of Sigma - I and Sigma_hat - I are
/// (lambda, alpha) / (sqrt(2) lambda) with lambda = ||alpha||.
inline CounterexampleSummary counterexample_experiment(std::size_t n, std::size_t p, std::size_t reps,
                                                       std::uint64_t seed, unsigned threads = 0) {
  if (p < 3) throw InvalidArgument("counterexample_experiment: p must be at least 3");
  if (n < 3) throw InvalidArgument("counterexample_experiment: n must be at least 3");
  if (reps < 1) throw InvalidArgument("counterexample_experiment: reps must be at least 1");

  const double a = 1.0 / std::sqrt(static_cast<double>(p));
  const std::vector<double> alpha(p - 1, a);
  const SymMatrix sigma = arrow(alpha, 1.0);
  const LowerTriangular factor = cholesky(sigma);
  const double lambda_plus = std::sqrt(static_cast<double>(p - 1)) * a;

  const std::function<detail::CounterexampleRep(std::size_t)> body = [&](std::size_t r) {
    const DataMatrix x = gaussian_sample(factor, n, derive_seed(seed, r));
    const SymMatrix s = sample_covariance(x);
    std::vector<double> alpha_hat(p - 1);
    for (std::size_t j = 1; j < p; ++j) alpha_hat[j - 1] = s(0, j);
    const SymMatrix estimate = arrow(alpha_hat, 1.0);

    detail::CounterexampleRep rep;
    double sq = 0.0, hat_sq = 0.0, cross = 0.0;
    for (std::size_t i = 0; i + 1 < p; ++i) {
      sq += (alpha[i] - alpha_hat[i]) * (alpha[i] - alpha_hat[i]);
      hat_sq += alpha_hat[i] * alpha_hat[i];
      cross += alpha[i] * alpha_hat[i];
    }
    rep.lambda1_sq = sq;
    rep.crosscheck = std::abs(std::sqrt(sq) - operator_norm(estimate - sigma));

    const double lph = std::sqrt(hat_sq);
    rep.lambda_plus_hat = lph;
    rep.abs_cos = std::abs((lambda_plus * lph + cross) / (2.0 * lambda_plus * lph));

    rep.residual = std::abs(eigenvalues(estimate).front() - 1.0 - lph);
    return rep;
  };
  const auto results = run_repetitions<detail::CounterexampleRep>(reps, threads, body);

  CounterexampleSummary out{};
  out.n = n;
  out.p = p;
  out.reps = reps;
  std::vector<double> l1;
  double sum = 0.0, sum_cos = 0.0, sum_lph = 0.0;
  for (const auto& r : results) {
    sum += r.lambda1_sq;
    sum_cos += r.abs_cos;
    sum_lph += r.lambda_plus_hat;
    l1.push_back(std::sqrt(r.lambda1_sq));
    out.max_norm_crosscheck = std::max(out.max_norm_crosscheck, r.crosscheck);
    out.max_lambda_plus_crosscheck = std::max(out.max_lambda_plus_crosscheck, r.residual);
  }
  const double reps_d = static_cast<double>(reps);
  out.mean_lambda1_sq = sum / reps_d;
  double ss = 0.0;
  for (const auto& r : results) ss += (r.lambda1_sq - out.mean_lambda1_sq) * (r.lambda1_sq - out.mean_lambda1_sq);
  out.var_lambda1_sq = reps > 1 ? ss / (reps_d - 1.0) : 0.0;
  out.median_lambda1 = median(l1);
  out.mean_abs_cos = sum_cos / reps_d;
  out.mean_lambda_plus_hat = sum_lph / reps_d;

  const double pd = static_cast<double>(p), nd = static_cast<double>(n);
  out.expected_lambda1_sq = (pd - 1.0 + (pd - 1.0) * a * a) / (nd - 1.0);
  const double l = pd / nd;
  out.limit_abs_cos = 0.5 * (1.0 + 1.0 / std::sqrt(1.0 + l));
  out.limit_lambda_plus = std::sqrt(1.0 + l);
  return out;
}

// Diagnostics.

/// 2 exp(-n t^2 / (2 C^4)): Hoeffding bound on P(|d_ij| > t) for entries
/// bounded by C.
inline double hoeffding_bound(std::size_t n, double t, double c) {
  if (n < 1) throw InvalidArgument("hoeffding_bound: n must be positive");
  if (!(t > 0.0)) throw InvalidArgument("hoeffding_bound: t must be positive");
  if (!(c > 0.0)) throw InvalidArgument("hoeffding_bound: C must be positive");
  return 2.0 * std::exp(-static_cast<double>(n) * t * t / (2.0 * std::pow(c, 4)));
}

struct TailCheck {
  double lhs;          ///< ||Sigma - T_t(Sigma)||_2
  double rhs;          ///< t / (1 - |rho|)
  double row_sum_rhs;  ///< 2 t / (1 - |rho|), the two-sided row-sum bound
};

/// Approximation error of thresholding the Toeplitz matrix rho^|i-j| at t.
inline TailCheck toeplitz_tail_check(double rho, std::size_t p, double t) {
  if (!(std::abs(rho) < 1.0)) throw InvalidArgument("toeplitz_tail_check: |rho| must be below 1");
  if (!(t > 0.0)) throw InvalidArgument("toeplitz_tail_check: t must be positive");
  const SymMatrix sigma = power_toeplitz(rho, p);
  const SymMatrix tail = sigma - hard_threshold(sigma, t, true).estimate;
  const double denom = 1.0 - std::abs(rho);
  return {operator_norm(tail), t / denom, 2.0 * t / denom};
}

}  // namespace sparsecov
