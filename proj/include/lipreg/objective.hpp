#pragma once

#include <span>

#include "lipreg/matrix.hpp"
#include "lipreg/sample.hpp"

namespace lipreg {

/// Empirical log-loss (nats) with its gradient and diagonal Hessian.
struct RiskEval {
  double value = 0.0;
  Vector gradient;
  Vector hessian_diag;
};

/// R_n(w) = sum_i [ones_i * -ln w_i + zeros_i * -ln(1 - w_i)], where ones/zeros
/// are the merged label counts. Throws DomainError unless 0 < w_i < 1.
RiskEval risk(std::span<const double> w, const Sample& s);

/// Value only; same domain rules as risk().
double risk_value(std::span<const double> w, const Sample& s);

enum class LogBase { e, two };

/// Result of expected_risk. `infinite` is set when some h(x) sits at 0 or 1
/// while the opposite label has positive mass; `value` is then +inf.
struct ExpectedRisk {
  double value = 0.0;
  bool infinite = false;
};

/// sum_x mass(x) * [p(x) * -log h(x) + (1 - p(x)) * -log(1 - h(x))].
ExpectedRisk expected_risk(std::span<const double> h, std::span<const double> true_p,
                           std::span<const double> mass, LogBase base);

}  // namespace lipreg
