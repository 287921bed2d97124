#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "sparsecov/error.hpp"
#include "sparsecov/matrix.hpp"

namespace sparsecov {

/// Eigenvalues sorted descending; column j of `vectors` pairs with value j.
struct EigenDecomposition {
  std::vector<double> values;
  Matrix vectors;
};

struct JacobiOptions {
  int max_sweeps = 64;
  /// Converged when the off-diagonal Frobenius mass is at most
  /// `relative_tolerance * ||M||_F`.
  double relative_tolerance = 1e-14;
};

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  return std::sqrt(2.0 * s);
}

/// Cyclic Jacobi on a full symmetric matrix. On return `a` is diagonal.
/// When `vt` is non-null its rows accumulate the eigenvectors.
inline void jacobi_diagonalize(Matrix& a, Matrix* vt, const JacobiOptions& opt) {
  const std::size_t n = a.rows();
  double frob = 0.0;
  for (double x : a.data()) frob += x * x;
  frob = std::sqrt(frob);
  const double target = opt.relative_tolerance * frob;

  for (int sweep = 0;; ++sweep) {
    const double off = off_diagonal_norm(a);
    if (off <= target) return;
    if (sweep == opt.max_sweeps) throw NonConvergence(sweep, off);

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Negligible against both diagonal entries: drop it.
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }

        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        auto rp = a.row(p);
        auto rq = a.row(q);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double x = rp[r];
          const double y = rq[r];
          const double nx = c * x - s * y;
          const double ny = s * x + c * y;
          rp[r] = nx;
          rq[r] = ny;
          a(r, p) = nx;
          a(r, q) = ny;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;

        if (vt != nullptr) {
          auto vp = vt->row(p);
          auto vq = vt->row(q);
          for (std::size_t r = 0; r < n; ++r) {
            const double x = vp[r];
            const double y = vq[r];
            vp[r] = c * x - s * y;
            vq[r] = s * x + c * y;
          }
        }
      }
    }
  }
}

inline std::vector<std::size_t> descending_order(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  return idx;
}

}  // namespace detail

/// Full symmetric eigendecomposition by cyclic Jacobi.
///
/// Eigenvalues are returned in nonincreasing order. Each eigenvector is
/// oriented so that its component of largest magnitude is positive (first
/// such index on ties). Throws NonConvergence if the off-diagonal mass has
/// not dropped below tolerance after `max_sweeps` sweeps.
inline EigenDecomposition eigensym(const SymMatrix& m, const JacobiOptions& opt = {}) {
  const std::size_t n = m.dim();
  Matrix a = m.to_full();
  Matrix vt = Matrix::identity(n);
  detail::jacobi_diagonalize(a, &vt, opt);

  std::vector<double> raw(n);
  for (std::size_t i = 0; i < n; ++i) raw[i] = a(i, i);
  const auto order = detail::descending_order(raw);

  EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    const auto src = vt.row(order[j]);
    std::size_t lead = 0;
    for (std::size_t r = 1; r < n; ++r)
      if (std::abs(src[r]) > std::abs(src[lead])) lead = r;
    const double sign = src[lead] < 0.0 ? -1.0 : 1.0;
    out.values[j] = raw[order[j]];
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = sign * src[r];
  }
  return out;
}

namespace detail {

/// Householder reduction of a full symmetric matrix to tridiagonal form.
/// `a` must hold the full symmetric matrix and is overwritten; updates are
/// applied to the whole leading block so every access is along a row. On return
/// `d` is the diagonal and `e[i]` the (i, i-1) subdiagonal entry.
inline void householder_tridiagonalize(Matrix& a, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = a.rows();
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t l = i - 1;
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (std::size_t k = 0; k <= l; ++k) scale += std::abs(a(i, k));
      if (scale == 0.0) {
        e[i] = a(i, l);
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          a(i, k) /= scale;
          h += a(i, k) * a(i, k);
        }
        double f = a(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        a(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          g = 0.0;
          const auto rj = a.row(j);
          const auto ri = a.row(i);
          for (std::size_t k = 0; k <= l; ++k) g += rj[k] * ri[k];
          e[j] = g / h;
          f += e[j] * a(i, j);
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) e[j] -= hh * a(i, j);
        const auto ri = a.row(i);
        for (std::size_t j = 0; j <= l; ++j) {
          f = ri[j];
          g = e[j];
          auto rj = a.row(j);
          for (std::size_t k = 0; k <= l; ++k) rj[k] -= f * e[k] + g * ri[k];
        }
      }
    } else {
      e[i] = a(i, l);
    }
    d[i] = h;
  }
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i);
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; `d` becomes the
/// eigenvalues (unsorted).
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, int max_iter = 60) {
  const int n = static_cast<int>(d.size());
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  if (n > 0) e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == max_iter) throw NonConvergence(max_iter, std::abs(e[l]));
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          const double f = s * e[i];
          const double b = c * e[i];
          e[i + 1] = (r = std::hypot(f, g));
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          d[i + 1] = g + (p = s * r);
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace detail

/// Eigenvalues only, nonincreasing. Uses Householder tridiagonalization and
/// implicit QL rather than Jacobi: several times faster for large p.
inline std::vector<double> eigenvalues(const SymMatrix& m) {
  Matrix a = m.to_full();
  std::vector<double> d, e;
  detail::householder_tridiagonalize(a, d, e);
  detail::tridiagonal_ql(d, e);
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

/// Eigenvalues by Jacobi, nonincreasing.
inline std::vector<double> jacobi_eigenvalues(const SymMatrix& m, const JacobiOptions& opt = {}) {
  Matrix a = m.to_full();
  detail::jacobi_diagonalize(a, nullptr, opt);
  std::vector<double> v(m.dim());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a(i, i);
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

/// Spectral norm, max_i |lambda_i(M)|.
inline double operator_norm(const SymMatrix& m) {
  const auto v = eigenvalues(m);
  return std::max(std::abs(v.front()), std::abs(v.back()));
}

/// Largest singular value of a rectangular matrix, via the top eigenvalue
/// of RᵀR.
inline double spectral_norm(const Matrix& r) {
  const Matrix gram = r.transpose() * r;
  SymMatrix g(gram.cols());
  for (std::size_t i = 0; i < gram.rows(); ++i)
    for (std::size_t j = i; j < gram.cols(); ++j) g.set(i, j, 0.5 * (gram(i, j) + gram(j, i)));
  return std::sqrt(std::max(0.0, eigenvalues(g).front()));
}

}  // namespace sparsecov
