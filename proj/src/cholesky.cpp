#include "lipreg/cholesky.hpp"

#include <cmath>

#include "lipreg/error.hpp"
#include "lipreg/kernels.hpp"

namespace lipreg {

void Cholesky::factorize(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ParameterError("Cholesky: matrix must be square");
  const auto& k = kernels::active();
  l_ = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double* li = l_.row(i).data();
    for (std::size_t j = 0; j < i; ++j) {
      const double* lj = l_.row(j).data();
      li[j] = (a(i, j) - k.dot(li, lj, j)) / lj[j];
    }
    const double d = a(i, i) - k.dot(li, li, i);
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw ConditioningError("matrix is not numerically positive-definite", i);
    }
    li[i] = std::sqrt(d);
  }
}

void Cholesky::solve_lower(std::span<double> b) const {
  const std::size_t n = size();
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < n; ++i) {
    const double* li = l_.row(i).data();
    b[i] = (b[i] - k.dot(li, b.data(), i)) / li[i];
  }
}

void Cholesky::solve_upper(std::span<double> y) const {
  const std::size_t n = size();
  const auto& k = kernels::active();
  // Column-oriented back substitution: row i of L is column i of L^T.
  for (std::size_t i = n; i-- > 0;) {
    const double* li = l_.row(i).data();
    y[i] /= li[i];
    k.axpy(-y[i], li, y.data(), i);
  }
}

Vector Cholesky::solve(std::span<const double> b) const {
  Vector x(b.begin(), b.end());
  solve_lower(x);
  solve_upper(x);
  return x;
}

double Cholesky::dual_norm(std::span<const double> b) const {
  Vector y(b.begin(), b.end());
  solve_lower(y);
  return std::sqrt(kernels::active().dot(y.data(), y.data(), y.size()));
}

}  // namespace lipreg
