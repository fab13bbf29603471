#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lipreg/barrier.hpp"
#include "lipreg/error.hpp"
#include "lipreg/matrix.hpp"
#include "lipreg/sample.hpp"

namespace lipreg {

/// A reference solver failed to converge within its budget.
class OracleError : public Error {
 public:
  using Error::Error;
};

/// Correction terms of Dykstra's scheme. Passing the state from a previous
/// projection onto the same polytope warm-starts the next one.
struct DykstraState {
  Vector box;
  /// One scalar per pair (i < j), row-major over the upper triangle; the
  /// correction vector of that slab is pair * (e_i - e_j).
  Vector pair;
  std::size_t sweeps = 0;
};

/// Euclidean projection of y onto {theta <= w_i <= 1-theta, |w_i - w_j| <= B_ij}
/// by Dykstra's alternating projections over the box and the pairwise slabs.
/// Stops when a full sweep moves no coordinate by more than `tol` and every
/// constraint holds to within `tol`.
Vector dykstra_project(std::span<const double> y, const Polytope& p, double tol = 1e-10,
                       DykstraState* state = nullptr);

struct OracleOptions {
  double tol = 1e-7;
  std::size_t max_iter = 200000;
  double projection_tol = 1e-10;
};

/// Minimizes R_n over the polytope by accelerated projected gradient with
/// adaptive restart and exact (Dykstra) projections. Runs until the gradient
/// mapping norm is at most tol/10. Requires n <= 12 and theta > 0.
Vector oracle_solve(const Sample& s, const Polytope& p, const OracleOptions& options = {});

/// Exhaustive search over the lattice theta + k*resolution (plus the endpoint
/// 1-theta) in every coordinate, keeping points that satisfy all constraints.
/// Requires n <= 3.
Vector grid_solve(const Sample& s, const Polytope& p, double resolution);

}  // namespace lipreg
