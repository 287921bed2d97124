#pragma once

#include <algorithm>
#include <vector>

#include "sparsecov/eigensym.hpp"
#include "sparsecov/error.hpp"
#include "sparsecov/matcore.hpp"

namespace sparsecov {

/// Raises every eigenvalue below `floor` to `floor` and rebuilds the
/// matrix. The result is generally dense even when M is sparse.
inline SymMatrix repair_truncate(const SymMatrix& m, double floor = 0.0) {
  if (!(floor >= 0.0)) throw InvalidArgument("repair_truncate: floor must be nonnegative");
  EigenDecomposition e = eigensym(m);
  for (double& v : e.values) v = std::max(v, floor);
  return reconstruct(e.vectors, e.values);
}

/// M - lambda_min(M) I when lambda_min(M) < -1e-12; M itself otherwise.
/// Only the diagonal changes, so the off-diagonal pattern is kept.
inline SymMatrix repair_shift(const SymMatrix& m) {
  const double lambda_min = eigenvalues(m).back();
  if (!(lambda_min < -1e-12)) return m;
  SymMatrix out = m;
  for (std::size_t i = 0; i < m.dim(); ++i) out.set(i, i, m(i, i) - lambda_min);
  return out;
}

}  // namespace sparsecov
