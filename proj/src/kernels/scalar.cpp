#include <algorithm>
#include <limits>

#include "lipreg/kernels.hpp"

namespace lipreg::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void risk_terms(const double* w, const double* ones, const double* zeros, std::size_t n,
                double* grad, double* hess) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 1.0 / w[i];
    const double b = 1.0 / (1.0 - w[i]);
    grad[i] = zeros[i] * b - ones[i] * a;
    hess[i] = ones[i] * (a * a) + zeros[i] * (b * b);
  }
}

double box_barrier(const double* w, double theta, std::size_t n, double* grad, double* hess) {
  double slack = std::numeric_limits<double>::infinity();
  const double upper = 1.0 - theta;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = w[i] - theta;
    const double hi = upper - w[i];
    slack = std::min(slack, std::min(lo, hi));
    const double a = 1.0 / lo;
    const double b = 1.0 / hi;
    grad[i] += b - a;
    hess[i] += a * a + b * b;
  }
  return slack;
}

double lipschitz_pairs(double w_i, const double* w, const double* bound, std::size_t m,
                       double* offdiag, double* diag, double* grad, double* grad_i,
                       double* diag_i) {
  double slack = std::numeric_limits<double>::infinity();
  double gi = 0.0;
  double di = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double zeta_ji = w[j] - w_i + bound[j];
    const double zeta_ij = w_i - w[j] + bound[j];
    slack = std::min(slack, std::min(zeta_ji, zeta_ij));
    const double p = 1.0 / zeta_ji;
    const double q = 1.0 / zeta_ij;
    const double s = p * p + q * q;
    gi += p - q;
    grad[j] += q - p;
    offdiag[j] = -s;
    diag[j] += s;
    di += s;
  }
  *grad_i += gi;
  *diag_i += di;
  return slack;
}

void envelopes(const double* w, const double* rho, double k, std::size_t n, double* lower,
               double* upper) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = k * rho[i];
    lo = std::max(lo, w[i] - r);
    hi = std::min(hi, w[i] + r);
  }
  *lower = lo;
  *upper = hi;
}

}  // namespace

namespace detail {
const Table scalar_table{Isa::scalar, dot,       axpy,           risk_terms,
                         box_barrier, lipschitz_pairs, envelopes};
}  // namespace detail

}  // namespace lipreg::kernels
