#include "lipreg/objective.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lipreg/error.hpp"
#include "lipreg/kernels.hpp"

namespace lipreg {

namespace {

void check_interior(std::span<const double> w, const Sample& s) {
  if (w.size() != s.size()) {
    throw DomainError("risk: expected " + std::to_string(s.size()) + " values, got " +
                      std::to_string(w.size()));
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0 && w[i] < 1.0)) {
      throw DomainError("risk: w[" + std::to_string(i) + "] = " + std::to_string(w[i]) +
                        " is not in (0, 1)");
    }
  }
}

}  // namespace

double risk_value(std::span<const double> w, const Sample& s) {
  check_interior(w, s);
  double value = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (s.ones()[i] != 0.0) value -= s.ones()[i] * std::log(w[i]);
    if (s.zeros()[i] != 0.0) value -= s.zeros()[i] * std::log1p(-w[i]);
  }
  return value;
}

RiskEval risk(std::span<const double> w, const Sample& s) {
  RiskEval r;
  r.value = risk_value(w, s);
  r.gradient.resize(w.size());
  r.hessian_diag.resize(w.size());
  kernels::active().risk_terms(w.data(), s.ones().data(), s.zeros().data(), w.size(),
                               r.gradient.data(), r.hessian_diag.data());
  return r;
}

ExpectedRisk expected_risk(std::span<const double> h, std::span<const double> true_p,
                           std::span<const double> mass, LogBase base) {
  if (h.size() != true_p.size() || h.size() != mass.size()) {
    throw ParameterError("expected_risk: h, true_p and mass must have equal length");
  }
  double total = 0.0;
  for (std::size_t x = 0; x < mass.size(); ++x) {
    if (!(mass[x] >= 0.0)) throw ParameterError("expected_risk: negative mass");
    if (!(true_p[x] >= 0.0 && true_p[x] <= 1.0)) {
      throw ParameterError("expected_risk: true_p outside [0, 1]");
    }
    if (!(h[x] >= 0.0 && h[x] <= 1.0)) throw ParameterError("expected_risk: h outside [0, 1]");
    total += mass[x];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParameterError("expected_risk: point mass sums to " + std::to_string(total));
  }

  const double scale = base == LogBase::two ? 1.0 / std::numbers::ln2 : 1.0;
  ExpectedRisk out;
  for (std::size_t x = 0; x < mass.size(); ++x) {
    const double p1 = mass[x] * true_p[x];
    const double p0 = mass[x] * (1.0 - true_p[x]);
    if ((p1 > 0.0 && h[x] == 0.0) || (p0 > 0.0 && h[x] == 1.0)) {
      out.infinite = true;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    if (p1 > 0.0) out.value -= p1 * std::log(h[x]);
    if (p0 > 0.0) out.value -= p0 * std::log1p(-h[x]);
  }
  out.value *= scale;
  return out;
}

}  // namespace lipreg
