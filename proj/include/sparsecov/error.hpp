#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sparsecov {

/// Base class for every error raised by the library. `code()` is a short
/// machine-readable tag (used by the CLI's JSON error output).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("InvalidArgument", what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error("DimensionMismatch", what) {}
};

class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(std::size_t pivot_index, double pivot)
      : Error("NotPositiveDefinite", "cholesky: pivot " + std::to_string(pivot_index) +
                                         " is " + std::to_string(pivot) +
                                         " (matrix is not positive definite)"),
        pivot_index_(pivot_index),
        pivot_(pivot) {}

  std::size_t pivot_index() const noexcept { return pivot_index_; }
  double pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_index_;
  double pivot_;
};

class NonConvergence : public Error {
 public:
  NonConvergence(int sweeps, double residual)
      : Error("NonConvergence", "eigensym: no convergence after " + std::to_string(sweeps) +
                                    " sweeps, off-diagonal residual " + std::to_string(residual)),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ZeroVariance : public Error {
 public:
  explicit ZeroVariance(std::size_t column)
      : Error("ZeroVariance", "column " + std::to_string(column) + " has zero sample variance"),
        column_(column) {}

  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class Overflow : public Error {
 public:
  explicit Overflow(const std::string& what) : Error("Overflow", what) {}
};

class NotOrthonormal : public Error {
 public:
  explicit NotOrthonormal(const std::string& which)
      : Error("NotOrthonormal", which + " does not have orthonormal columns") {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("ParseError", what) {}
};

}  // namespace sparsecov
