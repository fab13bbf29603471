#include "lipreg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lipreg {

namespace {

constexpr std::size_t kMaxOracleSize = 12;
constexpr std::size_t kMaxGridSize = 3;
constexpr std::size_t kMaxSweeps = 2000000;

std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

}  // namespace

Vector dykstra_project(std::span<const double> y, const Polytope& p, double tol,
                       DykstraState* state) {
  const std::size_t n = p.size();
  if (y.size() != n) throw ParameterError("dykstra_project: dimension mismatch");
  if (!(tol > 0.0)) throw ParameterError("dykstra_project: tol must be positive");
  const double lo = p.theta();
  const double hi = 1.0 - p.theta();

  DykstraState local;
  DykstraState& st = state ? *state : local;
  if (st.box.size() != n || st.pair.size() != pair_count(n)) {
    st.box.assign(n, 0.0);
    st.pair.assign(pair_count(n), 0.0);
  }

  // The primal iterate is y minus the sum of all corrections.
  Vector x(y.begin(), y.end());
  for (std::size_t i = 0; i < n; ++i) x[i] -= st.box[i];
  {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++k) {
        x[i] -= st.pair[k];
        x[j] += st.pair[k];
      }
    }
  }

  Vector before(n);
  for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    before = x;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x[i] + st.box[i];
      x[i] = std::clamp(v, lo, hi);
      st.box[i] = v - x[i];
    }
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++k) {
        const double a = st.pair[k];
        const double vi = x[i] + a;
        const double vj = x[j] - a;
        const double diff = vi - vj;
        const double b = p.bound(i, j);
        double shift = 0.0;
        if (diff > b) {
          shift = 0.5 * (diff - b);
        } else if (diff < -b) {
          shift = 0.5 * (diff + b);
        }
        x[i] = vi - shift;
        x[j] = vj + shift;
        st.pair[k] = shift;
      }
    }
    ++st.sweeps;

    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(x[i] - before[i]));
    if (moved > tol) continue;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max({worst, lo - x[i], x[i] - hi});
      for (std::size_t j = i + 1; j < n; ++j) {
        worst = std::max(worst, std::abs(x[i] - x[j]) - p.bound(i, j));
      }
    }
    if (worst <= tol) return x;
  }
  throw OracleError("Dykstra projection did not converge");
}

Vector oracle_solve(const Sample& s, const Polytope& p, const OracleOptions& options) {
  const std::size_t n = s.size();
  if (n > kMaxOracleSize) {
    throw ParameterError("oracle_solve supports n <= 12, got " + std::to_string(n));
  }
  if (p.size() != n) throw ParameterError("oracle_solve: sample and polytope sizes differ");
  if (!(p.theta() > 0.0)) throw ParameterError("oracle_solve needs theta > 0");
  if (!(options.tol > 0.0)) throw ParameterError("oracle_solve: tol must be positive");

  const Vector& c1 = s.ones();
  const Vector& c0 = s.zeros();
  const double theta = p.theta();

  auto value = [&](const Vector& w) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v -= c1[i] * std::log(w[i]) + c0[i] * std::log1p(-w[i]);
    return v;
  };

  double weight = 0.0;
  for (std::size_t i = 0; i < n; ++i) weight = std::max(weight, c1[i] + c0[i]);
  // Gradient Lipschitz constant of R_n on the truncated box.
  const double lg = weight / (theta * theta);
  // Projection error is amplified by lg in the gradient mapping.
  const double ptol = std::max(1e-14, std::min(options.projection_tol, options.tol / (100.0 * lg)));
  const double stop = options.tol / 10.0;

  DykstraState st;
  Vector x(n, 0.5);
  Vector y = x;
  Vector z(n);
  double fx = value(x);
  double tk = 1.0;
  bool restarted = false;

  for (std::size_t it = 0; it < options.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const double g = -c1[i] / y[i] + c0[i] / (1.0 - y[i]);
      z[i] = y[i] - g / lg;
    }
    Vector xn = dykstra_project(z, p, ptol, &st);
    double mapping = 0.0;
    for (std::size_t i = 0; i < n; ++i) mapping += (y[i] - xn[i]) * (y[i] - xn[i]);
    mapping = lg * std::sqrt(mapping);
    const double fn = value(xn);
    if (mapping <= stop) return fn <= fx ? xn : x;

    if (fn > fx && !restarted) {
      y = x;
      tk = 1.0;
      restarted = true;
      continue;
    }
    restarted = false;
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    const double mom = (tk - 1.0) / tn;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = std::clamp(xn[i] + mom * (xn[i] - x[i]), theta, 1.0 - theta);
    }
    x = std::move(xn);
    fx = fn;
    tk = tn;
  }
  throw OracleError("oracle_solve did not reach stationarity within " +
                    std::to_string(options.max_iter) + " iterations");
}

Vector grid_solve(const Sample& s, const Polytope& p, double resolution) {
  const std::size_t n = s.size();
  if (n == 0 || n > kMaxGridSize) {
    throw ParameterError("grid_solve supports 1 <= n <= 3, got " + std::to_string(n));
  }
  if (p.size() != n) throw ParameterError("grid_solve: sample and polytope sizes differ");
  if (!(resolution > 0.0)) throw ParameterError("grid_solve: resolution must be positive");
  const double lo = p.theta();
  const double hi = 1.0 - p.theta();
  if (!(lo > 0.0)) throw ParameterError("grid_solve needs theta > 0");

  Vector lattice;
  for (std::size_t k = 0;; ++k) {
    const double v = lo + static_cast<double>(k) * resolution;
    if (v > hi + 1e-12) break;
    lattice.push_back(std::min(v, hi));
  }
  if (lattice.back() < hi - 1e-12) lattice.push_back(hi);

  const std::size_t m = lattice.size();
  std::vector<Vector> loss(n, Vector(m));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      loss[i][k] = -s.ones()[i] * std::log(lattice[k]) - s.zeros()[i] * std::log1p(-lattice[k]);
    }
  }

  std::vector<std::size_t> idx(n), best(n);
  double best_value = std::numeric_limits<double>::infinity();
  constexpr double slack = 1e-12;

  auto search = [&](auto&& self, std::size_t depth, double partial) -> void {
    if (depth == n) {
      if (partial < best_value) {
        best_value = partial;
        best = idx;
      }
      return;
    }
    double from = lo, to = hi;
    for (std::size_t j = 0; j < depth; ++j) {
      const double wj = lattice[idx[j]];
      from = std::max(from, wj - p.bound(j, depth));
      to = std::min(to, wj + p.bound(j, depth));
    }
    auto first = std::lower_bound(lattice.begin(), lattice.end(), from - slack);
    auto last = std::upper_bound(lattice.begin(), lattice.end(), to + slack);
    for (auto it = first; it < last; ++it) {
      idx[depth] = static_cast<std::size_t>(it - lattice.begin());
      self(self, depth + 1, partial + loss[depth][idx[depth]]);
    }
  };
  search(search, 0, 0.0);

  Vector w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = lattice[best[i]];
  return w;
}

}  // namespace lipreg
