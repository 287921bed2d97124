#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sparsecov/error.hpp"

namespace sparsecov {

/// Upper bound on the dimension accepted by the matrix constructors.
inline constexpr std::size_t kDefaultMaxDim = 4096;

/// Dense row-major rectangular matrix. Used for eigenvector bases, data and
/// other non-symmetric intermediates.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Columns `first .. first+count-1` as a rows x count matrix.
  Matrix columns(std::size_t first, std::size_t count) const {
    Matrix out(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < count; ++j) out(i, j) = (*this)(i, first + j);
    return out;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionMismatch("matrix product: " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " times " + std::to_string(b.rows()) +
                            "x" + std::to_string(b.cols()));
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("matrix difference: shapes differ");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

/// Largest |entry|.
inline double max_abs(const Matrix& m) {
  double best = 0.0;
  for (double x : m.data()) best = std::max(best, std::abs(x));
  return best;
}

/// Dense real symmetric matrix. Only the upper triangle is stored, so
/// `(i, j)` and `(j, i)` always refer to the same value. Entries are finite.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(std::size_t p, std::size_t max_dim = kDefaultMaxDim) : p_(p) {
    if (p == 0) throw InvalidArgument("SymMatrix: dimension must be positive");
    if (p > max_dim)
      throw InvalidArgument("SymMatrix: dimension " + std::to_string(p) + " exceeds cap " +
                            std::to_string(max_dim));
    data_.assign(p * (p + 1) / 2, 0.0);
  }

  std::size_t dim() const noexcept { return p_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[index(i, j)]; }

  void set(std::size_t i, std::size_t j, double value) {
    if (!std::isfinite(value))
      throw InvalidArgument("SymMatrix: non-finite entry at (" + std::to_string(i) + ", " +
                            std::to_string(j) + ")");
    data_[index(i, j)] = value;
  }

  /// Packed upper triangle, row by row.
  std::span<const double> packed() const noexcept { return data_; }

  Matrix to_full() const {
    Matrix m(p_, p_);
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t j = i; j < p_; ++j) m(i, j) = m(j, i) = (*this)(i, j);
    return m;
  }

  /// Builds from a square matrix. Entries whose mirror differs by more than
  /// `tol` are rejected; accepted pairs are averaged.
  static SymMatrix from_full(const Matrix& m, double tol = 1e-9,
                             std::size_t max_dim = kDefaultMaxDim) {
    if (m.rows() != m.cols())
      throw InvalidArgument("SymMatrix: input is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", not square");
    SymMatrix s(m.rows(), max_dim);
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = i; j < m.cols(); ++j) {
        const double a = m(i, j), b = m(j, i);
        if (!(std::abs(a - b) <= tol))
          throw InvalidArgument("SymMatrix: entries (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") and its mirror differ");
        s.set(i, j, i == j ? a : 0.5 * (a + b));
      }
    return s;
  }

  static SymMatrix identity(std::size_t p) {
    SymMatrix s(p);
    for (std::size_t i = 0; i < p; ++i) s.set(i, i, 1.0);
    return s;
  }

  static SymMatrix diagonal(std::span<const double> d) {
    SymMatrix s(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) s.set(i, i, d[i]);
    return s;
  }

  std::vector<double> diag() const {
    std::vector<double> d(p_);
    for (std::size_t i = 0; i < p_; ++i) d[i] = (*this)(i, i);
    return d;
  }

  double max_abs() const noexcept {
    double best = 0.0;
    for (double x : data_) best = std::max(best, std::abs(x));
    return best;
  }

  SymMatrix& operator+=(const SymMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  SymMatrix& operator-=(const SymMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  SymMatrix& operator*=(double c) {
    for (double& x : data_) x *= c;
    return *this;
  }

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(double c, SymMatrix a) { return a *= c; }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t index(std::size_t i, std::size_t j) const noexcept {
    if (i > j) std::swap(i, j);
    return i * (2 * p_ - i + 1) / 2 + (j - i);
  }

  void check_same(const SymMatrix& o) const {
    if (o.p_ != p_)
      throw DimensionMismatch("SymMatrix: dimensions " + std::to_string(p_) + " and " +
                              std::to_string(o.p_));
  }

  std::size_t p_ = 0;
  std::vector<double> data_;
};

}  // namespace sparsecov
