#pragma once

#include <span>

#include "lipreg/matrix.hpp"

namespace lipreg {

/// Dense Cholesky factorization A = L L^T of a symmetric positive-definite matrix.
/// Only the lower triangle of A is read. Throws ConditioningError with the
/// failing pivot when A is not numerically positive-definite.
class Cholesky {
 public:
  Cholesky() = default;
  explicit Cholesky(const Matrix& a) { factorize(a); }

  void factorize(const Matrix& a);

  std::size_t size() const noexcept { return l_.rows(); }
  const Matrix& lower() const noexcept { return l_; }

  /// Solves L y = b in place.
  void solve_lower(std::span<double> b) const;
  /// Solves L^T x = y in place.
  void solve_upper(std::span<double> y) const;
  /// Solves A x = b.
  Vector solve(std::span<const double> b) const;

  /// sqrt(b^T A^{-1} b) with a single triangular solve.
  double dual_norm(std::span<const double> b) const;

 private:
  Matrix l_;
};

}  // namespace lipreg
