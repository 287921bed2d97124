#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "sparsecov/eigensym.hpp"
#include "sparsecov/matcore.hpp"
#include "sparsecov/sparsity.hpp"
#include "test_support.hpp"

using namespace sparsecov;
using test_util::random_pattern;

namespace {

SymMatrix as_matrix(const AdjacencyMatrix& a) {
  SymMatrix m(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = i; j < a.dim(); ++j) m.set(i, j, a(i, j) ? 1.0 : 0.0);
  return m;
}

AdjacencyMatrix star(std::size_t p, bool self_loops) {
  AdjacencyMatrix a = self_loops ? AdjacencyMatrix::identity(p) : AdjacencyMatrix(p);
  for (std::size_t j = 1; j < p; ++j) a.set(0, j, true);
  return a;
}

std::vector<std::size_t> shuffled(std::size_t p, CounterRng& rng) {
  std::vector<std::size_t> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace

TEST(Adjacency, Examples) {
  EXPECT_EQ(adjacency(SymMatrix::identity(4)), AdjacencyMatrix::identity(4));
  EXPECT_EQ(adjacency(e1(5)), star(5, true));

  SymMatrix tiny = SymMatrix::identity(2);
  tiny.set(0, 1, 1e-15);
  EXPECT_FALSE(adjacency(tiny, 1e-12)(0, 1));
  EXPECT_TRUE(adjacency(tiny, 0.0)(0, 1));
  EXPECT_THROW(adjacency(tiny, -1.0), InvalidArgument);
}

TEST(AdjacencyMatrix, SetIsSymmetric) {
  AdjacencyMatrix a(3);
  a.set(2, 0, true);
  EXPECT_TRUE(a(0, 2));
  EXPECT_EQ(a.count(), 2u);
}

TEST(WalkCount, Examples) {
  for (int k = 1; k <= 12; ++k) EXPECT_EQ(walk_count(AdjacencyMatrix::identity(7), k), WalkCount{7});

  const AdjacencyMatrix s = star(4, false);
  EXPECT_EQ(walk_count(s, 2), WalkCount{6});
  EXPECT_EQ(walk_count(s, 4), WalkCount{18});
  for (int k = 1; k <= 10; ++k) {
    WalkCount want = 2;
    for (int r = 0; r < k; ++r) want *= 3;
    EXPECT_EQ(walk_count(s, 2 * k), want) << k;
    EXPECT_EQ(walk_count(s, 2 * k - 1), WalkCount{0}) << k;
  }

  EXPECT_EQ(walk_count(AdjacencyMatrix::full(3), 2), WalkCount{9});
  EXPECT_THROW(walk_count(s, 0), InvalidArgument);
}

TEST(WalkCount, MatchesBruteForceEnumeration) {
  CounterRng rng(1);
  for (std::size_t p = 1; p <= 7; ++p)
    for (double density : {0.2, 0.5, 0.9}) {
      const AdjacencyMatrix a = random_pattern(p, density, rng);
      for (int k = 1; k <= 6; ++k)
        ASSERT_EQ(walk_count(a, k), WalkCount{test_util::enumerate_closed_walks(a, k)})
            << "p=" << p << " k=" << k;
    }
}

TEST(WalkCount, MatchesEigenvaluePowerSums) {
  CounterRng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t p = 2 + static_cast<std::size_t>(trial) % 39;
    const AdjacencyMatrix a = random_pattern(p, 0.05 + 0.9 * rng.uniform(), rng);
    const auto lambda = eigensym(as_matrix(a)).values;
    for (int k = 1; k <= 8; ++k) {
      double power_sum = 0.0;
      for (double l : lambda) power_sum += std::pow(l, k);
      const double exact = static_cast<double>(walk_count(a, k));
      EXPECT_NEAR(power_sum, exact, 1e-8 * std::max(1.0, exact)) << "p=" << p << " k=" << k;
    }
  }
}

TEST(WalkCount, ExactBeyondDoublePrecisionAndOverflow) {
  // Full pattern on p vertices: trace(J^k) = p^k.
  const AdjacencyMatrix full = AdjacencyMatrix::full(10);
  WalkCount want = 1;
  for (int k = 1; k <= 38; ++k) {
    want *= 10;
    ASSERT_EQ(walk_count(full, k), want) << k;
  }
  EXPECT_EQ(to_decimal(walk_count(full, 38)), "1" + std::string(38, '0'));
  EXPECT_THROW(walk_count(full, 39), Overflow);
  EXPECT_THROW(walk_count(AdjacencyMatrix::full(100), 20), Overflow);
}

TEST(WalkCount, MonotoneInBits) {
  CounterRng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = 3 + static_cast<std::size_t>(trial) % 15;
    const AdjacencyMatrix a = random_pattern(p, 0.3, rng);
    const AdjacencyMatrix b = a | random_pattern(p, 0.1, rng);
    for (int k = 2; k <= 8; k += 2) EXPECT_LE(walk_count(a, k), walk_count(b, k));
  }
}

TEST(WalkCount, UnionClosure) {
  CounterRng rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = 2 + static_cast<std::size_t>(trial) % 19;
    const AdjacencyMatrix a0 = random_pattern(p, 0.2, rng);
    const AdjacencyMatrix a1 = random_pattern(p, 0.2, rng);
    const AdjacencyMatrix a2 = a0 | a1;
    for (int k = 1; k <= 3; ++k) {
      const WalkCount factor = WalkCount{1} << (2 * k - 1);
      EXPECT_LE(walk_count(a2, 2 * k), factor * (walk_count(a0, 2 * k) + walk_count(a1, 2 * k)));
    }
  }
}

TEST(ToDecimal, Examples) {
  EXPECT_EQ(to_decimal(0), "0");
  EXPECT_EQ(to_decimal(301), "301");
  EXPECT_EQ(to_decimal(~WalkCount{0}), "340282366920938463463374607431768211455");
}

TEST(BetaIndex, Examples) {
  const auto id = beta_index(AdjacencyMatrix::identity(10), {4});
  EXPECT_EQ(id[0].beta_hat, 0.0);
  EXPECT_EQ(id[0].phi, WalkCount{10});

  const auto full = beta_index(AdjacencyMatrix::full(10), {4});
  EXPECT_EQ(full[0].phi, WalkCount{10000});
  EXPECT_NEAR(full[0].beta_hat, 1.0, 1e-15);

  const auto e1_rep = beta_index(adjacency(e1(101)), {2});
  EXPECT_EQ(e1_rep[0].phi, WalkCount{301});
  EXPECT_NEAR(e1_rep[0].beta_hat, std::log(301.0 / 101.0) / std::log(101.0), 1e-14);
  EXPECT_NEAR(e1_rep[0].beta_hat, 0.2367, 1e-4);

  EXPECT_THROW(beta_index(AdjacencyMatrix::identity(1), {2}), InvalidArgument);
  EXPECT_THROW(beta_index(AdjacencyMatrix::identity(5), {3}), InvalidArgument);
  EXPECT_THROW(beta_index(AdjacencyMatrix::identity(5), {0}), InvalidArgument);
}

TEST(BetaIndex, StarApproachesOneHalf) {
  const auto rep = beta_index(adjacency(e1(1001)), {2, 4, 8, 16});
  for (std::size_t i = 1; i < rep.size(); ++i) EXPECT_GT(rep[i].beta_hat, rep[i - 1].beta_hat);
  EXPECT_NEAR(rep.back().beta_hat, 0.5, 0.05);
  for (const auto& r : rep) EXPECT_LE(r.beta_hat, 0.5);
}

TEST(BetaIndex, ClampedAndPhiAtLeastP) {
  CounterRng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t p = 2 + static_cast<std::size_t>(trial) % 30;
    AdjacencyMatrix a = random_pattern(p, rng.uniform(), rng) | AdjacencyMatrix::identity(p);
    for (const auto& r : beta_index(a, {2, 4, 6})) {
      EXPECT_GE(r.phi, WalkCount{p});
      EXPECT_GE(r.beta_hat, 0.0);
      EXPECT_LE(r.beta_hat, 1.0);
    }
  }
  // No self-loops and no edges: phi = 0 clamps to 0.
  EXPECT_EQ(beta_index(AdjacencyMatrix(4), {2})[0].beta_hat, 0.0);
}

TEST(BetaIndex, PermutationInvariant) {
  CounterRng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 2 + static_cast<std::size_t>(trial) % 25;
    const AdjacencyMatrix a = random_pattern(p, 0.3, rng);
    const AdjacencyMatrix b = test_util::permute(a, shuffled(p, rng));
    const auto ra = beta_index(a, {2, 4, 6, 8});
    const auto rb = beta_index(b, {2, 4, 6, 8});
    for (std::size_t i = 0; i < ra.size(); ++i) {
      EXPECT_EQ(ra[i].phi, rb[i].phi);
      EXPECT_EQ(ra[i].beta_hat, rb[i].beta_hat);
    }
  }
}

TEST(LemmaBound, Examples) {
  EXPECT_NEAR(lemma_a1_bound(1.0, 1, 0.3, 4, 16.0), 2.0, 1e-15);
  EXPECT_EQ(lemma_a1_bound(0.0, 50, 0.5, 4, 3.0), 0.0);
  EXPECT_THROW(lemma_a1_bound(1.0, 5, 0.5, 3, 1.0), InvalidArgument);
  EXPECT_THROW(lemma_a1_bound(1.0, 5, 1.5, 4, 1.0), InvalidArgument);
  EXPECT_THROW(lemma_a1_bound(-1.0, 5, 0.5, 4, 1.0), InvalidArgument);
  EXPECT_THROW(lemma_a1_bound(1.0, 5, 0.5, 4, 0.0), InvalidArgument);
}

TEST(LemmaBound, DominatesTridiagonalNorm) {
  const std::size_t p = 50;
  const SymMatrix m = e2(p);
  const double norm = operator_norm(m);
  EXPECT_NEAR(norm, 1 + 2 * std::cos(std::numbers::pi / 51) / std::sqrt(50.0), 1e-12);
  const AdjacencyMatrix a = adjacency(m);
  for (const auto& r : beta_index(a, {2, 4, 6, 8, 10})) {
    const double f = trace_derived_f(r.phi, p, r.beta_hat, r.k);
    const double bound = lemma_a1_bound(m.max_abs(), p, r.beta_hat, r.k, f);
    EXPECT_NEAR(bound, std::pow(static_cast<double>(r.phi), 1.0 / r.k), 1e-9);
    EXPECT_GE(bound, norm) << r.k;
  }
}

TEST(LemmaBound, DominatesNormOfRandomSupportedMatrices) {
  CounterRng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = 3 + static_cast<std::size_t>(trial) % 30;
    const AdjacencyMatrix a = random_pattern(p, 0.2, rng) | AdjacencyMatrix::identity(p);
    SymMatrix m(p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i; j < p; ++j)
        if (a(i, j)) m.set(i, j, rng.normal());
    const auto r = beta_index(a, {4})[0];
    const double f = trace_derived_f(r.phi, p, r.beta_hat, 4);
    EXPECT_GE(lemma_a1_bound(m.max_abs(), p, r.beta_hat, 4, f), operator_norm(m) * (1 - 1e-12));
  }
}

TEST(ArrowInverse, OffHubEntry) {
  const std::vector<double> alpha(3, 0.3);
  const SymMatrix sigma = arrow(alpha, 1.0);
  const EigenDecomposition e = eigensym(sigma);
  std::vector<double> inv(e.values.size());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / e.values[i];
  const SymMatrix sigma_inv = reconstruct(e.vectors, inv);
  const double a2 = 0.09;
  EXPECT_NEAR(sigma_inv(2, 1), -a2 / (a2 * 3 - 1), 1e-9);
  EXPECT_NEAR(sigma_inv(2, 1), 0.1232876, 1e-7);
  EXPECT_LE(test_util::max_abs_diff(reconstruct(e.vectors, e.values), sigma), 1e-12);
}

TEST(SupportMetrics, Examples) {
  const AdjacencyMatrix t = star(5, true);
  const SupportMetrics same = support_metrics(t, t, true);
  EXPECT_EQ(same.false_positives, 0u);
  EXPECT_EQ(same.false_negatives, 0u);
  EXPECT_EQ(same.true_positives, 4u);
  EXPECT_EQ(same.precision, 1.0);
  EXPECT_EQ(same.recall, 1.0);

  const SupportMetrics none = support_metrics(AdjacencyMatrix(3), AdjacencyMatrix::full(3), true);
  EXPECT_EQ(none.false_negatives, 3u);
  EXPECT_EQ(none.true_positives, 0u);
  EXPECT_EQ(none.recall, 0.0);

  AdjacencyMatrix extra = t;
  extra.set(1, 2, true);
  const SupportMetrics fp = support_metrics(extra, t, true);
  EXPECT_EQ(fp.false_positives, 1u);
  EXPECT_DOUBLE_EQ(fp.precision, 0.8);

  const SupportMetrics with_diag = support_metrics(t, t, false);
  EXPECT_EQ(with_diag.true_positives, 9u);

  EXPECT_THROW(support_metrics(t, AdjacencyMatrix(4), true), DimensionMismatch);
}
