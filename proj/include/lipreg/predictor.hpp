#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "lipreg/matrix.hpp"
#include "lipreg/sample.hpp"

namespace lipreg {

/// Fit metadata carried along with a model.
struct FitSummary {
  std::size_t iterations = 0;
  double epsilon = 0.0;
  double epsilon_cert = 0.0;
  bool certified = false;
};

/// Fitted values on the (merged) sample plus what is needed to extend them.
class Model {
 public:
  /// Validates theta <= w_i <= 1-theta and |w_i - w_j| <= L rho_ij + 1e-9;
  /// throws ModelFormatError naming the offending index or pair.
  Model(Sample sample, Vector w_star, double lipschitz, double theta, double ddim,
        FitSummary fit = {});

  const Sample& sample() const noexcept { return sample_; }
  const Vector& w_star() const noexcept { return w_star_; }
  double lipschitz() const noexcept { return lipschitz_; }
  double theta() const noexcept { return theta_; }
  double ddim() const noexcept { return ddim_; }
  const FitSummary& fit() const noexcept { return fit_; }

 private:
  Sample sample_;
  Vector w_star_;
  double lipschitz_;
  double theta_;
  double ddim_;
  FitSummary fit_;
};

/// Value at a new point by enumerating all sample pairs: each pair (i, j) fixes
///   y_ij = (w_j rho_i + w_i rho_j) / (rho_i + rho_j)
/// with slope |w_i - w_j| / (rho_i + rho_j); the steepest pair wins. Ties are
/// checked to agree. A zero distance returns that point's value.
double extend_by_pairs(std::span<const double> w, std::span<const double> rho);

/// Same value in closed form: at the smallest slope k for which the McShane
/// envelope max_i(w_i - k rho_i) meets the Whitney envelope min_j(w_j + k rho_j),
/// their midpoint. k is found by bisection in O(n) per step.
double extend_by_envelopes(std::span<const double> w, std::span<const double> rho);

/// Exact Lipschitz extension to a point at normalized distances `rho` from the
/// merged sample points. Both routes above are evaluated and must agree to
/// 1e-9; the result is clamped to [theta, 1-theta].
double extend(const Model& m, std::span<const double> rho);

/// Rows to predict at: coordinates (coordinate-mode models) or raw distance
/// rows to every original training point (matrix-mode models).
struct Queries {
  InputMode mode = InputMode::coordinates;
  Matrix rows;
  std::optional<std::vector<int>> labels;
};

/// Reads a query file in the model's input format; a trailing `label` column is optional.
Queries load_queries(std::istream& in, InputMode mode);

/// Normalized distances from one query row to each merged sample point.
Vector distances_to_sample(const Model& m, std::span<const double> query);

Vector predict_batch(const Model& m, const Queries& q);

/// Mean log-loss (nats) of the extended hypothesis on labeled queries.
double holdout_risk(const Model& m, const Queries& q);

void save_model(std::ostream& out, const Model& m);
/// Parses and re-validates a model document.
Model load_model(std::istream& in);

}  // namespace lipreg
