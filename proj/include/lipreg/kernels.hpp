#pragma once

// Data-parallel inner loops of the solver and the predictor.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active table is chosen once at first use from the CPU's
// capabilities (override with LIPREG_KERNELS=scalar|avx2 or force()).
// Element-wise outputs are bit-identical across variants; reductions may
// differ in the last bits because lane order changes the summation order.

#include <cstddef>
#include <string_view>

namespace lipreg::kernels {

enum class Isa { scalar, avx2 };

std::string_view name(Isa isa) noexcept;

struct Table {
  Isa isa;

  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  /// Weighted log-loss derivatives:
  ///   grad[i] = -ones[i]/w[i] + zeros[i]/(1-w[i])
  ///   hess[i] =  ones[i]/w[i]^2 + zeros[i]/(1-w[i])^2
  void (*risk_terms)(const double* w, const double* ones, const double* zeros, std::size_t n,
                     double* grad, double* hess);

  /// Log barrier of the box [theta, 1-theta], added into grad/hess:
  ///   grad[i] += -1/(w[i]-theta) + 1/(1-theta-w[i])
  ///   hess[i] +=  1/(w[i]-theta)^2 + 1/(1-theta-w[i])^2
  /// Returns the smallest slack seen.
  double (*box_barrier)(const double* w, double theta, std::size_t n, double* grad, double* hess);

  /// Pairwise Lipschitz barrier terms between a fixed coordinate w_i and the
  /// block w[0..m) with bounds bound[0..m). For each j, with
  ///   p = 1/(w[j] - w_i + bound[j]),  q = 1/(w_i - w[j] + bound[j]):
  ///   *grad_i += p - q;   grad[j] += q - p
  ///   offdiag[j] = -(p^2 + q^2);  diag[j] += p^2 + q^2;  *diag_i += p^2 + q^2
  /// Returns the smallest slack seen.
  double (*lipschitz_pairs)(double w_i, const double* w, const double* bound, std::size_t m,
                            double* offdiag, double* diag, double* grad, double* grad_i,
                            double* diag_i);

  /// McShane and Whitney envelopes at slope k:
  ///   *lower = max_i (w[i] - k*rho[i]),  *upper = min_i (w[i] + k*rho[i])
  void (*envelopes)(const double* w, const double* rho, double k, std::size_t n, double* lower,
                    double* upper);
};

bool available(Isa isa) noexcept;

/// Kernel table for a specific ISA; throws if it is not available on this CPU.
const Table& table(Isa isa);

/// Table used by the library.
const Table& active();

/// Pin the active table (tests, benchmarks, the CLI's --kernels flag).
void force(Isa isa);

namespace detail {
extern const Table scalar_table;
#if defined(LIPREG_HAVE_AVX2)
extern const Table avx2_table;
#endif
}  // namespace detail

}  // namespace lipreg::kernels
