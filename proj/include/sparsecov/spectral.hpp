#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "sparsecov/eigensym.hpp"
#include "sparsecov/error.hpp"
#include "sparsecov/matrix.hpp"

namespace sparsecov {

struct WeylResult {
  double max_gap;    ///< max_i |lambda_i(A) - lambda_i(B)|, both sorted descending
  double norm_diff;  ///< ||A - B||_2
};

/// Compares ordered spectra of two symmetric matrices against the norm of
/// their difference; Weyl's inequality guarantees max_gap <= norm_diff.
inline WeylResult weyl_check(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("weyl_check: dimensions differ");
  const auto la = eigenvalues(a);
  const auto lb = eigenvalues(b);
  double gap = 0.0;
  for (std::size_t i = 0; i < la.size(); ++i) gap = std::max(gap, std::abs(la[i] - lb[i]));
  return {gap, operator_norm(a - b)};
}

struct CanonicalAngleReport {
  std::vector<double> cosines;  ///< descending, in [0, 1]
  std::vector<double> sines;    ///< paired with cosines, so ascending
  double max_sin = 0.0;
  std::optional<double> dk_bound;
};

namespace detail {

inline double orthonormality_error(const Matrix& x) {
  const Matrix g = x.transpose() * x;
  double err = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) err = std::max(err, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return err;
}

/// Gram matrix RᵀR as a SymMatrix.
inline SymMatrix gram(const Matrix& r) {
  const Matrix g = r.transpose() * r;
  SymMatrix s(g.rows());
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = i; j < g.cols(); ++j) s.set(i, j, 0.5 * (g(i, j) + g(j, i)));
  return s;
}

/// Singular values of r, descending.
inline std::vector<double> singular_values(const Matrix& r) {
  auto v = eigenvalues(gram(r));
  for (double& x : v) x = std::sqrt(std::max(0.0, x));
  return v;
}

}  // namespace detail

/// Canonical angles between the column spaces of two p x k matrices with
/// orthonormal columns.
///
/// Cosines are the singular values of X1ᵀZ. Sines are taken from the
/// singular values of the residual Z - X1 X1ᵀZ rather than sqrt(1 - c^2),
/// which keeps small angles accurate.
inline CanonicalAngleReport canonical_angles(const Matrix& x1, const Matrix& z) {
  if (x1.rows() != z.rows() || x1.cols() != z.cols())
    throw DimensionMismatch("canonical_angles: bases must have the same shape");
  if (x1.cols() == 0) throw InvalidArgument("canonical_angles: empty basis");
  if (detail::orthonormality_error(x1) > 1e-8) throw NotOrthonormal("X1");
  if (detail::orthonormality_error(z) > 1e-8) throw NotOrthonormal("Z");

  const Matrix cross = x1.transpose() * z;
  CanonicalAngleReport out;
  out.cosines = detail::singular_values(cross);
  for (double& c : out.cosines) c = std::clamp(c, 0.0, 1.0);

  const Matrix residual = z - x1 * cross;
  out.sines = detail::singular_values(residual);
  std::reverse(out.sines.begin(), out.sines.end());
  for (double& s : out.sines) s = std::clamp(s, 0.0, 1.0);
  out.max_sin = out.sines.back();
  return out;
}

/// ||Sigma Z - Z M||_2 / delta: the sin(theta) bound on the angles between
/// span(Z) and the matching eigenspace of Sigma when delta separates the
/// spectrum of M from the rest of Sigma's spectrum.
inline double davis_kahan(const SymMatrix& sigma, const Matrix& z, const Matrix& m, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("davis_kahan: delta must be positive");
  if (z.rows() != sigma.dim() || m.rows() != z.cols() || m.cols() != z.cols())
    throw DimensionMismatch("davis_kahan: shapes of Sigma, Z and M do not agree");
  if (detail::orthonormality_error(z) > 1e-8) throw NotOrthonormal("Z");
  const Matrix r = sigma.to_full() * z - z * m;
  return spectral_norm(r) / delta;
}

/// Diagonal k x k matrix.
inline Matrix diagonal_matrix(const std::vector<double>& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

/// Eigenvector columns of `e` with the given (descending-order) indices.
inline Matrix eigen_columns(const EigenDecomposition& e, const std::vector<std::size_t>& indices) {
  Matrix out(e.vectors.rows(), indices.size());
  for (std::size_t i = 0; i < e.vectors.rows(); ++i)
    for (std::size_t c = 0; c < indices.size(); ++c) out(i, c) = e.vectors(i, indices[c]);
  return out;
}

}  // namespace sparsecov
