#pragma once

// Shared helpers for the test programs: random instances and finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "lipreg/barrier.hpp"
#include "lipreg/matrix.hpp"
#include "lipreg/sample.hpp"

namespace testing {

using lipreg::Matrix;
using lipreg::Sample;
using lipreg::Vector;

inline std::vector<int> random_labels(std::mt19937_64& g, std::size_t n) {
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(g() % 2);
  return y;
}

/// Points uniform in [0,1]^dim.
inline Sample random_cloud(std::mt19937_64& g, std::size_t n, std::size_t dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix c(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) c(i, k) = u(g);
  }
  return Sample::from_coordinates(c, random_labels(g, n), {});
}

/// Symmetrized random matrix with zero diagonal (not necessarily a metric).
inline Sample random_symmetric(std::mt19937_64& g, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (u(g) + u(g));
      d(i, j) = d(j, i) = v;
    }
  }
  return Sample::from_distances(d, random_labels(g, n), {});
}

/// A strictly feasible point: a random box point pulled toward 1/2 until every
/// pair constraint holds with room to spare.
inline Vector random_interior(std::mt19937_64& g, const lipreg::Polytope& p, double margin = 0.9) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = p.size();
  const double lo = p.theta(), hi = 1.0 - p.theta();
  Vector v(n);
  for (auto& x : v) x = lo + (hi - lo) * (0.02 + 0.96 * u(g));
  double s = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::abs(v[i] - v[j]);
      if (d > 0.0) s = std::min(s, p.bound(i, j) / d);
    }
  }
  s *= margin * u(g) * 0.98 + 0.02 * margin;
  Vector w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 + s * (v[i] - 0.5);
  return w;
}

/// Central difference gradient of f at w.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& w,
                          double h) {
  Vector g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    Vector a = w, b = w;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// Central difference Jacobian of a vector field (rows = outputs).
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& w,
                          double h) {
  const std::size_t n = w.size();
  Matrix j(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    Vector a = w, b = w;
    a[c] += h;
    b[c] -= h;
    const Vector fa = f(a), fb = f(b);
    for (std::size_t r = 0; r < n; ++r) j(r, c) = (fa[r] - fb[r]) / (2.0 * h);
  }
  return j;
}

/// max |a - b| / max(max |a|, 1)
inline double rel_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, scale = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(a[i]));
  }
  return diff / scale;
}

inline double rel_error(const Matrix& a, const Matrix& b) {
  return rel_error(std::span<const double>(a.data(), a.rows() * a.cols()),
                   std::span<const double>(b.data(), b.rows() * b.cols()));
}

}  // namespace testing
