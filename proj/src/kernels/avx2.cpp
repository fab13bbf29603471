// AVX2 variants. Compiled with -mavx2 -mfma -ffp-contract=off; only reached
// through the dispatch table after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <limits>

#include "lipreg/kernels.hpp"

namespace lipreg::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmin(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_min_pd(lo, hi);
  return std::min(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return std::max(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void risk_terms(const double* w, const double* ones, const double* zeros, std::size_t n,
                double* grad, double* hess) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wv = _mm256_loadu_pd(w + i);
    const __m256d c1 = _mm256_loadu_pd(ones + i);
    const __m256d c0 = _mm256_loadu_pd(zeros + i);
    const __m256d a = _mm256_div_pd(one, wv);
    const __m256d b = _mm256_div_pd(one, _mm256_sub_pd(one, wv));
    _mm256_storeu_pd(grad + i, _mm256_sub_pd(_mm256_mul_pd(c0, b), _mm256_mul_pd(c1, a)));
    _mm256_storeu_pd(hess + i, _mm256_add_pd(_mm256_mul_pd(c1, _mm256_mul_pd(a, a)),
                                             _mm256_mul_pd(c0, _mm256_mul_pd(b, b))));
  }
  for (; i < n; ++i) {
    const double a = 1.0 / w[i];
    const double b = 1.0 / (1.0 - w[i]);
    grad[i] = zeros[i] * b - ones[i] * a;
    hess[i] = ones[i] * (a * a) + zeros[i] * (b * b);
  }
}

double box_barrier(const double* w, double theta, std::size_t n, double* grad, double* hess) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d th = _mm256_set1_pd(theta);
  const __m256d up = _mm256_set1_pd(1.0 - theta);
  __m256d slack = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wv = _mm256_loadu_pd(w + i);
    const __m256d lo = _mm256_sub_pd(wv, th);
    const __m256d hi = _mm256_sub_pd(up, wv);
    slack = _mm256_min_pd(slack, _mm256_min_pd(lo, hi));
    const __m256d a = _mm256_div_pd(one, lo);
    const __m256d b = _mm256_div_pd(one, hi);
    _mm256_storeu_pd(grad + i, _mm256_add_pd(_mm256_loadu_pd(grad + i), _mm256_sub_pd(b, a)));
    _mm256_storeu_pd(hess + i,
                     _mm256_add_pd(_mm256_loadu_pd(hess + i),
                                   _mm256_add_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b))));
  }
  double s = hmin(slack);
  const double upper = 1.0 - theta;
  for (; i < n; ++i) {
    const double lo = w[i] - theta;
    const double hi = upper - w[i];
    s = std::min(s, std::min(lo, hi));
    const double a = 1.0 / lo;
    const double b = 1.0 / hi;
    grad[i] += b - a;
    hess[i] += a * a + b * b;
  }
  return s;
}

double lipschitz_pairs(double w_i, const double* w, const double* bound, std::size_t m,
                       double* offdiag, double* diag, double* grad, double* grad_i,
                       double* diag_i) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d wi = _mm256_set1_pd(w_i);
  __m256d slack = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  __m256d gacc = _mm256_setzero_pd();
  __m256d dacc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    const __m256d wj = _mm256_loadu_pd(w + j);
    const __m256d bj = _mm256_loadu_pd(bound + j);
    const __m256d zeta_ji = _mm256_add_pd(_mm256_sub_pd(wj, wi), bj);
    const __m256d zeta_ij = _mm256_add_pd(_mm256_sub_pd(wi, wj), bj);
    slack = _mm256_min_pd(slack, _mm256_min_pd(zeta_ji, zeta_ij));
    const __m256d p = _mm256_div_pd(one, zeta_ji);
    const __m256d q = _mm256_div_pd(one, zeta_ij);
    const __m256d s = _mm256_add_pd(_mm256_mul_pd(p, p), _mm256_mul_pd(q, q));
    gacc = _mm256_add_pd(gacc, _mm256_sub_pd(p, q));
    _mm256_storeu_pd(grad + j, _mm256_add_pd(_mm256_loadu_pd(grad + j), _mm256_sub_pd(q, p)));
    _mm256_storeu_pd(offdiag + j, _mm256_sub_pd(_mm256_setzero_pd(), s));
    _mm256_storeu_pd(diag + j, _mm256_add_pd(_mm256_loadu_pd(diag + j), s));
    dacc = _mm256_add_pd(dacc, s);
  }
  double sl = hmin(slack);
  double gi = hsum(gacc);
  double di = hsum(dacc);
  for (; j < m; ++j) {
    const double zeta_ji = w[j] - w_i + bound[j];
    const double zeta_ij = w_i - w[j] + bound[j];
    sl = std::min(sl, std::min(zeta_ji, zeta_ij));
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
  return sl;
}

void envelopes(const double* w, const double* rho, double k, std::size_t n, double* lower,
               double* upper) {
  const __m256d kv = _mm256_set1_pd(k);
  __m256d lo = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  __m256d hi = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wv = _mm256_loadu_pd(w + i);
    const __m256d r = _mm256_mul_pd(kv, _mm256_loadu_pd(rho + i));
    lo = _mm256_max_pd(lo, _mm256_sub_pd(wv, r));
    hi = _mm256_min_pd(hi, _mm256_add_pd(wv, r));
  }
  double l = hmax(lo);
  double h = hmin(hi);
  for (; i < n; ++i) {
    const double r = k * rho[i];
    l = std::max(l, w[i] - r);
    h = std::min(h, w[i] + r);
  }
  *lower = l;
  *upper = h;
}

}  // namespace

namespace detail {
const Table avx2_table{Isa::avx2,  dot,       axpy,           risk_terms,
                       box_barrier, lipschitz_pairs, envelopes};
}  // namespace detail

}  // namespace lipreg::kernels
