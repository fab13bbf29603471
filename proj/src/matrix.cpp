#include "lipreg/matrix.hpp"

#include "lipreg/kernels.hpp"

namespace lipreg {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector multiply(const Matrix& a, std::span<const double> x) {
  const auto& k = kernels::active();
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = k.dot(a.row(i).data(), x.data(), a.cols());
  return y;
}

}  // namespace lipreg
