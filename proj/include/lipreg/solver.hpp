#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "lipreg/barrier.hpp"
#include "lipreg/error.hpp"
#include "lipreg/matrix.hpp"
#include "lipreg/sample.hpp"

namespace lipreg {

/// Step constants of the short-step path-following scheme.
///
/// A Newton step from a point with local gradient norm lambda <= tau lands at
/// lambda <= (tau/(1-tau))^2, and raising t by gamma/||grad f0||* adds at most
/// gamma. The defaults close that loop: lambda <= beta after every Newton step
/// and lambda <= beta + gamma <= tau after every increase of t.
struct PathConstants {
  double tau = 0.2291;
  double gamma = 0.14;
  double beta = 0.088;

  /// Throws ParameterError unless tau <= 1/2, 0 < gamma <= tau - (tau/(1-tau))^2,
  /// 0 < beta <= (tau/(1-tau))^2 and beta + gamma keeps the next Newton step below beta.
  void validate() const;
};

/// Iterate of the scheme on f(w; t) = t * R_n(w) + F(w).
struct SolverState {
  Vector w;
  double t = 0.0;
  std::size_t k = 0;
  /// ||grad f(w; t)||* measured in the Hessian of f(.; t) at w.
  double lambda = 0.0;
  /// Suboptimality bound at this t (+inf while t == 0).
  double cert_gap = 0.0;
  /// The objective gradient vanished: w minimizes R_n outright.
  bool optimal = false;
};

struct TraceRecord {
  std::size_t k = 0;
  double t = 0.0;
  /// lambda at (w_{k-1}, t_k), right after t was raised.
  double lambda_increase = 0.0;
  /// lambda at (w_k, t_k), after the Newton step.
  double lambda = 0.0;
  double objective = 0.0;
  double certificate = 0.0;
};

struct FitOptions {
  PathConstants constants{};
  /// Target suboptimality, in nats of total (summed) empirical risk.
  double epsilon = 1e-4;
  /// 0 selects default_max_iter().
  std::size_t max_iter = 0;
  bool record_trace = false;
};

struct FitResult {
  Vector w_star;
  std::size_t iterations = 0;
  /// Certified bound on R_n(w_star) - min R_n (nats).
  double epsilon_cert = 0.0;
  bool certified = false;
  /// Stopped because the objective gradient vanished.
  bool exact_optimum = false;
  double nu = 0.0;
  double t_final = 0.0;
  /// t after the first increment, gamma / ||grad R_n(w0)||*_{w0,0}.
  double t_first = 0.0;
  double initial_dual_norm = 0.0;
  double max_lambda_increase = 0.0;
  double max_lambda_newton = 0.0;
  /// Iterations where lambda exceeded tau after a t increase or beta after a Newton step.
  std::size_t consistency_violations = 0;
  /// Extra Newton steps taken at fixed t to restore lambda <= beta.
  std::size_t recovery_steps = 0;
  std::vector<TraceRecord> trace;
};

/// Raised when an iterate leaves the feasible set; carries the trace so far.
class FitError : public InvariantError {
 public:
  FitError(const std::string& what, std::vector<TraceRecord> trace)
      : InvariantError(what), trace_(std::move(trace)) {}
  const std::vector<TraceRecord>& trace() const noexcept { return trace_; }

 private:
  std::vector<TraceRecord> trace_;
};

/// sqrt(g^T H^{-1} g) via a Cholesky factorization of H.
double local_dual_norm(std::span<const double> g, const Matrix& h);

/// (w0, t0) = (analytic center, 0), with lambda evaluated there.
SolverState initial_state(const Sample& s, const Polytope& p);

/// w <- w - [hess f(w;t)]^{-1} grad f(w;t) at fixed t; lambda recomputed at the new w.
SolverState newton_step(const SolverState& state, const Sample& s, const Polytope& p,
                        const PathConstants& c = {});

/// t <- t + gamma / ||grad R_n(w)||*_{w,t}; lambda recomputed at the new t.
/// Marks the state optimal (t unchanged) if the objective gradient is zero.
SolverState increase_t(const SolverState& state, const Sample& s, const Polytope& p,
                       const PathConstants& c = {});

/// (1/t) * (nu + beta (beta + sqrt nu) / (1 - beta)). Throws for t <= 0.
double certificate(double t, double nu, const PathConstants& c);
double certificate(const SolverState& state, double nu, const PathConstants& c);

/// Smallest t whose certificate is <= epsilon.
double termination_threshold(double nu, double epsilon, const PathConstants& c);

/// ceil(64 sqrt(nu) ln(nu n / epsilon)).
std::size_t default_max_iter(double nu, std::size_t n, double epsilon);

/// Path-following fit of the truncated Lipschitz log-loss problem.
FitResult fit(const Sample& s, const Polytope& p, const FitOptions& options = {});

/// Line-delimited JSON: one header record then one record per iteration.
void write_trace(std::ostream& out, const FitResult& r, const Polytope& p,
                 const FitOptions& options);

}  // namespace lipreg
