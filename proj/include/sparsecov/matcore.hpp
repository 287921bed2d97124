#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "sparsecov/eigensym.hpp"
#include "sparsecov/error.hpp"
#include "sparsecov/matrix.hpp"

namespace sparsecov {

/// Symmetric Toeplitz matrix, M(i, j) = first_row[|i - j|].
inline SymMatrix toeplitz(std::span<const double> first_row) {
  if (first_row.empty()) throw InvalidArgument("toeplitz: empty first row");
  const std::size_t p = first_row.size();
  SymMatrix m(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) m.set(i, j, first_row[j - i]);
  return m;
}

/// Toeplitz matrix with entries rho^|i-j|.
inline SymMatrix power_toeplitz(double rho, std::size_t p) {
  std::vector<double> row(p);
  double x = 1.0;
  for (std::size_t k = 0; k < p; ++k, x *= rho) row[k] = x;
  return toeplitz(row);
}

/// Arrow matrix: constant diagonal, first row/column (beyond the corner)
/// equal to `alpha`, zero elsewhere. Dimension is alpha.size() + 1.
inline SymMatrix arrow(std::span<const double> alpha, double diag) {
  if (alpha.empty()) throw InvalidArgument("arrow: alpha must be nonempty");
  const std::size_t p = alpha.size() + 1;
  SymMatrix m(p);
  for (std::size_t i = 0; i < p; ++i) m.set(i, i, diag);
  for (std::size_t j = 1; j < p; ++j) m.set(0, j, alpha[j - 1]);
  return m;
}

/// Identity plus a star on vertex 0 with weights 1/sqrt(p).
inline SymMatrix e1(std::size_t p) {
  if (p < 2) throw InvalidArgument("e1: p must be at least 2");
  const std::vector<double> alpha(p - 1, 1.0 / std::sqrt(static_cast<double>(p)));
  return arrow(alpha, 1.0);
}

/// Identity plus a path with weights 1/sqrt(p) on the first off-diagonal.
inline SymMatrix e2(std::size_t p) {
  if (p < 2) throw InvalidArgument("e2: p must be at least 2");
  SymMatrix m = SymMatrix::identity(p);
  const double w = 1.0 / std::sqrt(static_cast<double>(p));
  for (std::size_t i = 0; i + 1 < p; ++i) m.set(i, i + 1, w);
  return m;
}

/// Entrywise absolute value.
inline SymMatrix hadamard_abs(const SymMatrix& m) {
  SymMatrix out(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = i; j < m.dim(); ++j) out.set(i, j, std::abs(m(i, j)));
  return out;
}

/// max_i sum_j |M(i, j)|, an upper bound on the operator norm of a
/// symmetric matrix.
inline double row_sum_bound(const SymMatrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.dim(); ++j) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

/// Lower-triangular factor with strictly positive diagonal.
class LowerTriangular {
 public:
  explicit LowerTriangular(std::size_t p) : p_(p), data_(p * (p + 1) / 2, 0.0) {}

  std::size_t dim() const noexcept { return p_; }

  double operator()(std::size_t i, std::size_t j) const {
    return j > i ? 0.0 : data_[i * (i + 1) / 2 + j];
  }
  double& at(std::size_t i, std::size_t j) { return data_[i * (i + 1) / 2 + j]; }

  /// Row i restricted to columns 0..i.
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * (i + 1) / 2, i + 1}; }

  /// y = L z.
  void apply(std::span<const double> z, std::span<double> y) const {
    for (std::size_t i = 0; i < p_; ++i) {
      const auto r = row(i);
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += r[k] * z[k];
      y[i] = s;
    }
  }

  Matrix to_full() const {
    Matrix m(p_, p_);
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t j = 0; j <= i; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

 private:
  std::size_t p_;
  std::vector<double> data_;
};

/// Cholesky factor L with L Lᵀ = M. Throws NotPositiveDefinite when a pivot
/// falls to 1e-12 * max(diag) or below.
inline LowerTriangular cholesky(const SymMatrix& m) {
  const std::size_t p = m.dim();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, m(i, i));
  const double floor = 1e-12 * max_diag;

  LowerTriangular l(p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = m(i, j);
      const auto ri = l.row(i);
      const auto rj = l.row(j);
      for (std::size_t k = 0; k < j; ++k) s -= ri[k] * rj[k];
      if (i == j) {
        if (!(s > floor)) throw NotPositiveDefinite(i, s);
        l.at(i, i) = std::sqrt(s);
      } else {
        l.at(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

/// V diag(values) Vᵀ.
inline SymMatrix reconstruct(const Matrix& vectors, std::span<const double> values) {
  const std::size_t p = vectors.rows();
  const std::size_t k = values.size();
  SymMatrix out(p);
  for (std::size_t i = 0; i < p; ++i) {
    const auto vi = vectors.row(i);
    for (std::size_t j = i; j < p; ++j) {
      const auto vj = vectors.row(j);
      double s = 0.0;
      for (std::size_t c = 0; c < k; ++c) s += vi[c] * values[c] * vj[c];
      out.set(i, j, s);
    }
  }
  return out;
}

}  // namespace sparsecov
