#pragma once

#include <span>

#include "lipreg/matrix.hpp"
#include "lipreg/sample.hpp"

namespace lipreg {

/// Feasible set {w : theta <= w_i <= 1-theta, |w_i - w_j| <= B_ij} with
/// B_ij = L * rho(X_i, X_j).
class Polytope {
 public:
  Polytope(const Sample& s, double lipschitz, double theta);
  /// Direct construction from a bound matrix B (symmetric, zero diagonal,
  /// positive off-diagonal). theta may be 0 here, which drops the truncation.
  Polytope(Matrix bounds, double theta, double lipschitz = 1.0);

  std::size_t size() const noexcept { return bounds_.rows(); }
  const Matrix& bounds() const noexcept { return bounds_; }
  double bound(std::size_t i, std::size_t j) const noexcept { return bounds_(i, j); }
  double theta() const noexcept { return theta_; }
  double lipschitz() const noexcept { return lipschitz_; }

  /// Returns an empty string when w is strictly feasible, else a description
  /// of the first violated constraint (box constraints are checked first).
  std::string first_violation(std::span<const double> w) const;
  bool strictly_feasible(std::span<const double> w) const {
    return first_violation(w).empty();
  }

 private:
  void validate() const;

  Matrix bounds_;
  double theta_;
  double lipschitz_;
};

struct BarrierEval {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

/// F(w) = -sum_i [ln(w_i - theta) + ln(1 - theta - w_i)]
///        - sum_{i<j} [ln(w_j - w_i + B_ij) + ln(w_i - w_j + B_ij)]
/// with gradient and dense Hessian. Throws DomainError naming the first
/// violated constraint unless w is strictly feasible.
BarrierEval barrier_eval(std::span<const double> w, const Polytope& p);

/// Gradient and Hessian of F only, written into caller storage (resized as needed).
void barrier_derivatives(std::span<const double> w, const Polytope& p, Vector& gradient,
                         Matrix& hessian);

/// nu = n(n-1) + 2n: every log term of F contributes one.
double barrier_parameter(const Polytope& p);

/// n(n-1): the count when the box terms are not part of F.
double lipschitz_barrier_parameter(const Polytope& p);

/// The constant 1/2 vector. Asserts the barrier gradient vanishes there.
Vector analytic_center(const Polytope& p);

}  // namespace lipreg
