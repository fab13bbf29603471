#include "lipreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>

#include <json.hpp>

#include "lipreg/cholesky.hpp"
#include "lipreg/kernels.hpp"
#include "lipreg/objective.hpp"

namespace lipreg {

void PathConstants::validate() const {
  const double ratio2 = (tau / (1.0 - tau)) * (tau / (1.0 - tau));
  if (!(tau > 0.0 && tau <= 0.5)) throw ParameterError("tau must lie in (0, 1/2]");
  if (!(gamma > 0.0 && gamma <= tau - ratio2)) {
    throw ParameterError("gamma must lie in (0, tau - tau^2/(1-tau)^2]");
  }
  if (!(beta > 0.0 && beta <= ratio2)) throw ParameterError("beta must lie in (0, tau^2/(1-tau)^2]");
  const double after_increase = beta + gamma;
  const double after_newton =
      (after_increase / (1.0 - after_increase)) * (after_increase / (1.0 - after_increase));
  if (!(after_increase <= tau && after_newton <= beta)) {
    throw ParameterError("beta + gamma does not keep the Newton step inside the beta region");
  }
}

namespace {

/// Derivatives of f(.; t) at one w, with the Hessian factorized. Changing t
/// only reassembles and refactors; the w-dependent parts are kept.
class PathPoint {
 public:
  PathPoint(const Sample& s, const Polytope& p, Vector w, double t)
      : sample_(&s), w_(std::move(w)) {
    const std::size_t n = w_.size();
    obj_grad_.resize(n);
    obj_hess_.resize(n);
    if (w_.size() != s.size()) throw DomainError("solver: dimension mismatch");
    barrier_derivatives(w_, p, bar_grad_, bar_hess_);
    kernels::active().risk_terms(w_.data(), s.ones().data(), s.zeros().data(), n,
                                 obj_grad_.data(), obj_hess_.data());
    set_t(t);
  }

  void set_t(double t) {
    t_ = t;
    const std::size_t n = w_.size();
    hess_ = bar_hess_;
    grad_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      hess_(i, i) += t * obj_hess_[i];
      grad_[i] = t * obj_grad_[i] + bar_grad_[i];
    }
    chol_.factorize(hess_);
  }

  const Vector& w() const noexcept { return w_; }
  double t() const noexcept { return t_; }

  double lambda() const { return chol_.dual_norm(grad_); }
  double objective_norm() const { return chol_.dual_norm(obj_grad_); }

  /// Newton direction H^{-1} g and lambda = sqrt(g^T H^{-1} g) from one pair of solves.
  std::pair<Vector, double> newton() const {
    Vector y = grad_;
    chol_.solve_lower(y);
    const double lam = std::sqrt(kernels::active().dot(y.data(), y.data(), y.size()));
    chol_.solve_upper(y);
    return {std::move(y), lam};
  }

  double objective_value() const { return risk_value(w_, *sample_); }

 private:
  const Sample* sample_;
  Vector w_;
  double t_ = 0.0;
  Vector obj_grad_, obj_hess_;
  Vector bar_grad_;
  Matrix bar_hess_;
  Vector grad_;
  Matrix hess_;
  Cholesky chol_;
};

Vector step(const Vector& w, const Vector& direction) {
  Vector out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] - direction[i];
  return out;
}

double safe_certificate(double t, double nu, const PathConstants& c) {
  return t > 0.0 ? certificate(t, nu, c) : std::numeric_limits<double>::infinity();
}

}  // namespace

double local_dual_norm(std::span<const double> g, const Matrix& h) {
  if (g.size() != h.rows()) throw ParameterError("local_dual_norm: dimension mismatch");
  return Cholesky(h).dual_norm(g);
}

double certificate(double t, double nu, const PathConstants& c) {
  if (!(t > 0.0)) throw DomainError("certificate is undefined for t <= 0");
  return (nu + c.beta * (c.beta + std::sqrt(nu)) / (1.0 - c.beta)) / t;
}

double certificate(const SolverState& state, double nu, const PathConstants& c) {
  return certificate(state.t, nu, c);
}

double termination_threshold(double nu, double epsilon, const PathConstants& c) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  return (nu + c.beta * (c.beta + std::sqrt(nu)) / (1.0 - c.beta)) / epsilon;
}

std::size_t default_max_iter(double nu, std::size_t n, double epsilon) {
  const double log_term = std::max(1.0, std::log(nu * static_cast<double>(n) / epsilon));
  return static_cast<std::size_t>(std::ceil(64.0 * std::sqrt(nu) * log_term));
}

SolverState initial_state(const Sample& s, const Polytope& p) {
  SolverState st;
  st.w = analytic_center(p);
  st.t = 0.0;
  st.lambda = PathPoint(s, p, st.w, 0.0).lambda();
  st.cert_gap = std::numeric_limits<double>::infinity();
  return st;
}

SolverState newton_step(const SolverState& state, const Sample& s, const Polytope& p,
                        const PathConstants& c) {
  const PathPoint here(s, p, state.w, state.t);
  auto [direction, lam] = here.newton();
  Vector next = step(state.w, direction);
  if (const std::string bad = p.first_violation(next); !bad.empty()) {
    throw InvariantError("Newton step left the feasible set (lambda " + std::to_string(lam) +
                         "): " + bad);
  }
  SolverState out;
  out.w = std::move(next);
  out.t = state.t;
  out.k = state.k + 1;
  out.lambda = PathPoint(s, p, out.w, out.t).lambda();
  out.cert_gap = safe_certificate(out.t, barrier_parameter(p), c);
  return out;
}

SolverState increase_t(const SolverState& state, const Sample& s, const Polytope& p,
                       const PathConstants& c) {
  PathPoint here(s, p, state.w, state.t);
  const double norm = here.objective_norm();
  SolverState out = state;
  if (!(norm > 0.0)) {
    out.optimal = true;
    out.cert_gap = 0.0;
    return out;
  }
  out.t = state.t + c.gamma / norm;
  here.set_t(out.t);
  out.lambda = here.lambda();
  out.cert_gap = safe_certificate(out.t, barrier_parameter(p), c);
  return out;
}

FitResult fit(const Sample& s, const Polytope& p, const FitOptions& options) {
  const PathConstants& c = options.constants;
  c.validate();
  if (s.size() != p.size()) throw ParameterError("fit: sample and polytope sizes differ");
  const std::size_t n = s.size();

  FitResult r;
  r.nu = barrier_parameter(p);
  const double t_stop = termination_threshold(r.nu, options.epsilon, c);
  const std::size_t max_iter =
      options.max_iter > 0 ? options.max_iter : default_max_iter(r.nu, n, options.epsilon);

  auto point = std::make_unique<PathPoint>(s, p, analytic_center(p), 0.0);
  double t = 0.0;

  auto fail = [&](const std::string& what) -> FitError {
    return FitError(what, std::move(r.trace));
  };

  while (true) {
    if (r.iterations >= max_iter) break;

    const double norm = point->objective_norm();
    if (r.iterations == 0) r.initial_dual_norm = norm;
    if (!(norm > 0.0)) {
      r.exact_optimum = true;
      break;
    }
    t += c.gamma / norm;
    if (r.iterations == 0) r.t_first = t;
    point->set_t(t);

    auto [direction, lam_inc] = point->newton();
    r.max_lambda_increase = std::max(r.max_lambda_increase, lam_inc);
    bool violated = lam_inc > c.tau;

    Vector next = step(point->w(), direction);
    if (const std::string bad = p.first_violation(next); !bad.empty()) {
      throw fail("iteration " + std::to_string(r.iterations + 1) +
                 ": Newton step left the feasible set: " + bad);
    }
    point = std::make_unique<PathPoint>(s, p, std::move(next), t);
    double lam = point->lambda();
    r.max_lambda_newton = std::max(r.max_lambda_newton, lam);

    // Restore lambda <= beta at this t before moving on; never needed when the
    // constants satisfy validate() and arithmetic is exact.
    for (int extra = 0; lam > c.beta && extra < 50; ++extra) {
      violated = true;
      auto [d2, unused] = point->newton();
      (void)unused;
      Vector again = step(point->w(), d2);
      if (const std::string bad = p.first_violation(again); !bad.empty()) {
        throw fail("recovery Newton step left the feasible set: " + bad);
      }
      point = std::make_unique<PathPoint>(s, p, std::move(again), t);
      lam = point->lambda();
      ++r.recovery_steps;
    }
    if (lam > c.beta) throw fail("could not restore lambda <= beta at t = " + std::to_string(t));
    if (violated) ++r.consistency_violations;

    ++r.iterations;
    if (options.record_trace) {
      r.trace.push_back({r.iterations, t, lam_inc, lam, point->objective_value(),
                         certificate(t, r.nu, c)});
    }
    if (t >= t_stop) break;
  }

  r.w_star = point->w();
  r.t_final = t;
  if (r.exact_optimum) {
    r.certified = true;
    r.epsilon_cert = 0.0;
  } else {
    r.epsilon_cert = safe_certificate(t, r.nu, c);
    r.certified = t >= t_stop && r.epsilon_cert <= options.epsilon;
  }
  return r;
}

void write_trace(std::ostream& out, const FitResult& r, const Polytope& p,
                 const FitOptions& options) {
  nlohmann::json header = {{"format", "lipreg-trace"},
                           {"version", 1},
                           {"n", p.size()},
                           {"nu", r.nu},
                           {"lipschitz", p.lipschitz()},
                           {"theta", p.theta()},
                           {"epsilon", options.epsilon},
                           {"tau", options.constants.tau},
                           {"gamma", options.constants.gamma},
                           {"beta", options.constants.beta}};
  out << header.dump() << '\n';
  for (const TraceRecord& rec : r.trace) {
    nlohmann::json line = {{"k", rec.k},
                           {"t", rec.t},
                           {"lambda_increase", rec.lambda_increase},
                           {"lambda", rec.lambda},
                           {"objective", rec.objective},
                           {"certificate", rec.certificate}};
    out << line.dump() << '\n';
  }
}

}  // namespace lipreg
