#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sparsecov/error.hpp"
#include "sparsecov/matrix.hpp"

namespace sparsecov {

using WalkCount = unsigned __int128;

/// Symmetric 0/1 pattern: the graph of nonzero entries of a matrix.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(std::size_t p) : p_(p), bits_(p * p, 0) {}

  std::size_t dim() const noexcept { return p_; }

  bool operator()(std::size_t i, std::size_t j) const { return bits_[i * p_ + j] != 0; }

  void set(std::size_t i, std::size_t j, bool on) {
    bits_[i * p_ + j] = bits_[j * p_ + i] = on ? 1 : 0;
  }

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }

  static AdjacencyMatrix identity(std::size_t p) {
    AdjacencyMatrix a(p);
    for (std::size_t i = 0; i < p; ++i) a.set(i, i, true);
    return a;
  }

  static AdjacencyMatrix full(std::size_t p) {
    AdjacencyMatrix a(p);
    std::fill(a.bits_.begin(), a.bits_.end(), std::uint8_t{1});
    return a;
  }

  /// Union of two patterns of the same size.
  friend AdjacencyMatrix operator|(const AdjacencyMatrix& a, const AdjacencyMatrix& b) {
    if (a.p_ != b.p_) throw DimensionMismatch("adjacency union: dimensions differ");
    AdjacencyMatrix c(a.p_);
    for (std::size_t k = 0; k < a.bits_.size(); ++k) c.bits_[k] = a.bits_[k] | b.bits_[k];
    return c;
  }

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

 private:
  std::size_t p_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Pattern of entries with |M(i, j)| > zero_tol.
inline AdjacencyMatrix adjacency(const SymMatrix& m, double zero_tol = 0.0) {
  if (!(zero_tol >= 0.0)) throw InvalidArgument("adjacency: zero_tol must be nonnegative");
  AdjacencyMatrix a(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = i; j < m.dim(); ++j) a.set(i, j, std::abs(m(i, j)) > zero_tol);
  return a;
}

/// Decimal rendering of a 128-bit count.
inline std::string to_decimal(WalkCount v) {
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

/// Number of closed walks of length k, trace(A^k), in exact arithmetic.
///
/// For each start vertex the walk-count vector is propagated along the
/// adjacency lists up to length ceil(k/2); the trace is assembled as
/// sum_j (A^a)_ij (A^b)_ij with a + b = k. Any overflow of 128 bits, final
/// or intermediate, throws Overflow.
inline WalkCount walk_count(const AdjacencyMatrix& a, int k) {
  if (k < 1) throw InvalidArgument("walk_count: k must be positive");
  const std::size_t p = a.dim();
  std::vector<std::vector<std::size_t>> nbrs(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      if (a(i, j)) nbrs[i].push_back(j);

  const int hi = (k + 1) / 2;
  const int lo = k - hi;
  auto overflow = [k] { return Overflow("walk_count: count for k=" + std::to_string(k) + " exceeds 128 bits"); };

  WalkCount total = 0;
  std::vector<WalkCount> cur(p), next(p), low(p);
  for (std::size_t start = 0; start < p; ++start) {
    std::fill(cur.begin(), cur.end(), WalkCount{0});
    cur[start] = 1;
    if (lo == 0) low = cur;
    for (int step = 1; step <= hi; ++step) {
      std::fill(next.begin(), next.end(), WalkCount{0});
      for (std::size_t v = 0; v < p; ++v) {
        if (cur[v] == 0) continue;
        for (std::size_t w : nbrs[v])
          if (__builtin_add_overflow(next[w], cur[v], &next[w])) throw overflow();
      }
      cur.swap(next);
      if (step == lo) low = cur;
    }
    for (std::size_t j = 0; j < p; ++j) {
      WalkCount prod;
      if (__builtin_mul_overflow(cur[j], low[j], &prod)) throw overflow();
      if (__builtin_add_overflow(total, prod, &total)) throw overflow();
    }
  }
  return total;
}

struct SparsityRecord {
  int k;
  WalkCount phi;
  double beta_hat;
};

using SparsityReport = std::vector<SparsityRecord>;

/// Empirical sparsity exponent at each even k: the beta solving
/// phi = p^(beta (k-1) + 1), clamped to [0, 1].
inline SparsityReport beta_index(const AdjacencyMatrix& a, const std::vector<int>& ks) {
  const std::size_t p = a.dim();
  if (p < 2) throw InvalidArgument("beta_index: p must be at least 2");
  SparsityReport report;
  report.reserve(ks.size());
  for (int k : ks) {
    if (k < 2 || k % 2 != 0) throw InvalidArgument("beta_index: k must be even and >= 2, got " + std::to_string(k));
    const WalkCount phi = walk_count(a, k);
    double beta = 0.0;
    if (phi != 0) {
      const double log_p = std::log(static_cast<double>(p));
      const double log_phi = std::log(static_cast<long double>(phi));
      beta = std::clamp((log_phi - log_p) / ((k - 1) * log_p), 0.0, 1.0);
    }
    report.push_back({k, phi, beta});
  }
  return report;
}

/// m p^(beta (1 - 1/k) + 1/k) f_k^(1/k): bound on the operator norm of a
/// matrix with entries at most m whose pattern has phi(k) <= f_k p^(beta(k-1)+1).
inline double lemma_a1_bound(double m_max, std::size_t p, double beta, int k, double f_k) {
  if (!(m_max >= 0.0)) throw InvalidArgument("lemma_a1_bound: m_max must be nonnegative");
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("lemma_a1_bound: beta must lie in [0, 1]");
  if (k < 2 || k % 2 != 0) throw InvalidArgument("lemma_a1_bound: k must be even");
  if (!(f_k > 0.0)) throw InvalidArgument("lemma_a1_bound: f_k must be positive");
  const double kd = static_cast<double>(k);
  return m_max * std::pow(static_cast<double>(p), beta * (1.0 - 1.0 / kd) + 1.0 / kd) *
         std::pow(f_k, 1.0 / kd);
}

/// The f(k) for which phi = f(k) p^(beta (k-1) + 1) holds exactly.
inline double trace_derived_f(WalkCount phi, std::size_t p, double beta, int k) {
  return static_cast<double>(static_cast<long double>(phi) /
                             std::pow(static_cast<long double>(p), beta * (k - 1) + 1.0L));
}

struct SupportMetrics {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 1.0;
  double recall = 1.0;
};

/// Compares an estimated support with the truth over the upper triangle.
/// Precision (recall) is 1 when there are no predicted (true) positives.
inline SupportMetrics support_metrics(const AdjacencyMatrix& estimated, const AdjacencyMatrix& truth,
                                      bool ignore_diagonal) {
  if (estimated.dim() != truth.dim()) throw DimensionMismatch("support_metrics: dimensions differ");
  SupportMetrics out;
  const std::size_t p = truth.dim();
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = ignore_diagonal ? i + 1 : i; j < p; ++j) {
      const bool e = estimated(i, j), t = truth(i, j);
      if (e && t) ++out.true_positives;
      else if (e) ++out.false_positives;
      else if (t) ++out.false_negatives;
    }
  const std::size_t predicted = out.true_positives + out.false_positives;
  const std::size_t actual = out.true_positives + out.false_negatives;
  if (predicted > 0) out.precision = static_cast<double>(out.true_positives) / static_cast<double>(predicted);
  if (actual > 0) out.recall = static_cast<double>(out.true_positives) / static_cast<double>(actual);
  return out;
}

}  // namespace sparsecov
