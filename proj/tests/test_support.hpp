#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sparsecov/matrix.hpp"
#include "sparsecov/random.hpp"
#include "sparsecov/sparsity.hpp"

namespace sparsecov::test_util {

/// Symmetric matrix with i.i.d. N(0, scale^2) entries on and above the diagonal.
inline SymMatrix random_symmetric(std::size_t p, CounterRng& rng, double scale = 1.0) {
  SymMatrix m(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) m.set(i, j, scale * rng.normal());
  return m;
}

/// Random symmetric 0/1 pattern with each upper-triangle bit on with
/// probability `density`.
inline AdjacencyMatrix random_pattern(std::size_t p, double density, CounterRng& rng) {
  AdjacencyMatrix a(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) a.set(i, j, rng.uniform() < density);
  return a;
}

/// Number of closed walks of length k by explicit enumeration of every
/// vertex sequence v0, v1, ..., v_{k-1}, v0.
inline std::uint64_t enumerate_closed_walks(const AdjacencyMatrix& a, int k) {
  const std::size_t p = a.dim();
  std::uint64_t count = 0;
  std::vector<std::size_t> path(static_cast<std::size_t>(k));
  std::function<void(int)> extend = [&](int depth) {
    if (depth == k) {
      if (a(path[static_cast<std::size_t>(k - 1)], path[0])) ++count;
      return;
    }
    for (std::size_t v = 0; v < p; ++v) {
      if (depth > 0 && !a(path[static_cast<std::size_t>(depth - 1)], v)) continue;
      path[static_cast<std::size_t>(depth)] = v;
      extend(depth + 1);
    }
  };
  extend(0);
  return count;
}

/// Permutes rows and columns: out(i, j) = m(perm[i], perm[j]).
inline SymMatrix permute(const SymMatrix& m, const std::vector<std::size_t>& perm) {
  SymMatrix out(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = i; j < m.dim(); ++j) out.set(i, j, m(perm[i], perm[j]));
  return out;
}

inline AdjacencyMatrix permute(const AdjacencyMatrix& a, const std::vector<std::size_t>& perm) {
  AdjacencyMatrix out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = i; j < a.dim(); ++j) out.set(i, j, a(perm[i], perm[j]));
  return out;
}

inline double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = i; j < a.dim(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
  return d;
}

}  // namespace sparsecov::test_util
