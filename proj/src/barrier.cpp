#include "lipreg/barrier.hpp"

#include <cmath>
#include <sstream>

#include "lipreg/error.hpp"
#include "lipreg/kernels.hpp"

namespace lipreg {

namespace {

Matrix scaled_distances(const Sample& s, double lipschitz) {
  Matrix b(s.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) b(i, j) = lipschitz * s.distance(i, j);
  }
  return b;
}

}  // namespace

Polytope::Polytope(const Sample& s, double lipschitz, double theta)
    : bounds_(scaled_distances(s, lipschitz)), theta_(theta), lipschitz_(lipschitz) {
  validate();
}

Polytope::Polytope(Matrix bounds, double theta, double lipschitz)
    : bounds_(std::move(bounds)), theta_(theta), lipschitz_(lipschitz) {
  validate();
}

void Polytope::validate() const {
  if (!(lipschitz_ > 0.0) || !std::isfinite(lipschitz_)) {
    throw ParameterError("Lipschitz constant must be positive and finite");
  }
  if (!(theta_ >= 0.0 && theta_ < 0.5)) throw ParameterError("theta must lie in [0, 1/2)");
  const std::size_t n = bounds_.rows();
  if (n == 0 || bounds_.cols() != n) throw ParameterError("bound matrix must be square, n >= 1");
  for (std::size_t i = 0; i < n; ++i) {
    if (bounds_(i, i) != 0.0) throw DataError("bound matrix diagonal must be 0", i, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (bounds_(i, j) != bounds_(j, i)) throw DataError("bound matrix is not symmetric", i, j);
      if (!(bounds_(i, j) > 0.0) || !std::isfinite(bounds_(i, j))) {
        throw DataError("off-diagonal bounds must be positive (merge duplicates first)", i, j);
      }
    }
  }
}

std::string Polytope::first_violation(std::span<const double> w) const {
  const std::size_t n = size();
  std::ostringstream msg;
  msg.precision(17);
  if (w.size() != n) {
    msg << "expected " << n << " coordinates, got " << w.size();
    return msg.str();
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w[i] - theta_ > 0.0)) {
      msg << "box constraint w[" << i << "] > theta violated (w = " << w[i] << ")";
      return msg.str();
    }
    if (!((1.0 - theta_) - w[i] > 0.0)) {
      msg << "box constraint w[" << i << "] < 1 - theta violated (w = " << w[i] << ")";
      return msg.str();
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = w[i] - w[j];
      if (!(bounds_(i, j) - std::abs(d) > 0.0)) {
        msg << "Lipschitz constraint |w[" << i << "] - w[" << j << "]| < " << bounds_(i, j)
            << " violated (difference " << d << ")";
        return msg.str();
      }
    }
  }
  return {};
}

void barrier_derivatives(std::span<const double> w, const Polytope& p, Vector& gradient,
                         Matrix& hessian) {
  const std::size_t n = p.size();
  if (w.size() != n) throw DomainError("barrier: " + p.first_violation(w));
  const auto& k = kernels::active();

  gradient.assign(n, 0.0);
  if (hessian.rows() != n || hessian.cols() != n) hessian = Matrix(n, n);
  Vector diag(n, 0.0);

  double slack = k.box_barrier(w.data(), p.theta(), n, gradient.data(), diag.data());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t m = n - i - 1;
    const double s =
        k.lipschitz_pairs(w[i], w.data() + i + 1, p.bounds().row(i).data() + i + 1, m,
                          &hessian(i, i + 1), diag.data() + i + 1, gradient.data() + i + 1,
                          &gradient[i], &diag[i]);
    slack = std::min(slack, s);
  }
  if (!(slack > 0.0)) {
    const std::string where = p.first_violation(w);
    throw DomainError("barrier: " + (where.empty() ? "point is on the boundary" : where));
  }
  for (std::size_t i = 0; i < n; ++i) {
    hessian(i, i) = diag[i];
    for (std::size_t j = i + 1; j < n; ++j) hessian(j, i) = hessian(i, j);
  }
}

BarrierEval barrier_eval(std::span<const double> w, const Polytope& p) {
  BarrierEval out;
  barrier_derivatives(w, p, out.gradient, out.hessian);
  const std::size_t n = p.size();
  const double theta = p.theta();
  double v = 0.0;
  for (std::size_t i = 0; i < n; ++i) v -= std::log(w[i] - theta) + std::log((1.0 - theta) - w[i]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      v -= std::log(w[j] - w[i] + p.bound(i, j)) + std::log(w[i] - w[j] + p.bound(i, j));
    }
  }
  out.value = v;
  return out;
}

double barrier_parameter(const Polytope& p) {
  const double n = static_cast<double>(p.size());
  return n * (n - 1.0) + 2.0 * n;
}

double lipschitz_barrier_parameter(const Polytope& p) {
  const double n = static_cast<double>(p.size());
  return n * (n - 1.0);
}

Vector analytic_center(const Polytope& p) {
  Vector w(p.size(), 0.5);
  Vector g;
  Matrix h;
  barrier_derivatives(w, p, g, h);
  double norm2 = 0.0;
  for (double gi : g) norm2 += gi * gi;
  if (!(std::sqrt(norm2) <= 1e-10)) {
    throw InvariantError("barrier gradient does not vanish at the constant 1/2 vector");
  }
  return w;
}

}  // namespace lipreg
