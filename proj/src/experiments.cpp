#include "lipreg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "lipreg/error.hpp"
#include "lipreg/objective.hpp"
#include "lipreg/rng.hpp"

namespace lipreg {

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (successes > trials) throw ParameterError("wilson_interval: successes exceed trials");
  if (trials == 0) return {0.0, 1.0};
  const double t = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / t;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / t;
  const double center = (p + z2 / (2.0 * t)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / t + z2 / (4.0 * t * t));
  return {std::max(0.0, std::min(center - half, p)), std::min(1.0, std::max(center + half, p))};
}

namespace {

/// Runs trial(i, acc) for i in [0, trials) across threads, one accumulator per
/// shard, then folds the shards in shard order.
template <class Acc, class Trial, class Merge>
Acc run_sharded(const RunOptions& run, Acc init, Trial trial, Merge merge) {
  unsigned threads = run.threads ? run.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, run.trials / 1024 + 1)));
  std::vector<Acc> shards(threads, init);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned s = 0; s < threads; ++s) {
    pool.emplace_back([&, s] {
      try {
        const std::uint64_t from = run.trials * s / threads;
        const std::uint64_t to = run.trials * (s + 1) / threads;
        for (std::uint64_t i = from; i < to; ++i) trial(i, shards[s]);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Acc out = init;
  for (const Acc& s : shards) merge(out, s);
  return out;
}

TrialReport make_report(std::string construction, const RunOptions& run, std::uint64_t successes) {
  TrialReport r;
  r.construction = std::move(construction);
  r.seed = run.seed;
  r.trials = run.trials;
  r.successes = successes;
  r.estimate = run.trials ? static_cast<double>(successes) / static_cast<double>(run.trials) : 0.0;
  r.wilson = wilson_interval(successes, run.trials);
  return r;
}

void check_trials(const RunOptions& run) {
  if (run.trials == 0) throw ParameterError("trials must be positive");
}

}  // namespace

double realizable_all_zero_probability(std::uint64_t n) {
  if (n == 0) throw ParameterError("n must be positive");
  const double nn = static_cast<double>(n);
  return std::exp(nn * std::log1p(-1.0 / (2.0 * nn)));
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("binary_entropy: p outside [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

double realizable_excess_risk(std::uint64_t n, double eps) {
  if (n == 0) throw ParameterError("n must be positive");
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  const double nn = static_cast<double>(n);
  const double p = 1.0 / (2.0 * nn);
  const double q_log = -4.0 * eps * nn;  // ln of the prediction
  const double cross = -p * q_log - (1.0 - p) * std::log1p(-std::exp(q_log));
  return cross - binary_entropy(p);
}

double realizable_witness(std::uint64_t n, double eps) {
  if (n == 0) throw ParameterError("n must be positive");
  return 2.0 * eps - binary_entropy(1.0 / (2.0 * static_cast<double>(n)));
}

TrialReport realizable_lb_trial(std::uint64_t n, double eps, const RunOptions& run) {
  if (n == 0) throw ParameterError("n must be positive");
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  check_trials(run);
  const double nn = static_cast<double>(n);
  if (!(std::exp(-4.0 * eps * nn) < 0.5)) {
    throw ParameterError("realizable construction needs e^{-4 eps n} < 1/2");
  }
  if (!(binary_entropy(1.0 / (2.0 * nn)) <= eps)) {
    throw ParameterError("realizable construction needs H(1/(2n)) <= eps; increase n or eps");
  }
  const double p = 1.0 / (2.0 * nn);
  const std::uint64_t count = run_sharded<std::uint64_t>(
      run, 0,
      [&](std::uint64_t i, std::uint64_t& acc) {
        Philox4x32 rng(run.seed, i);
        for (std::uint64_t k = 0; k < n; ++k) {
          if (rng.uniform() < p) return;
        }
        ++acc;
      },
      [](std::uint64_t& a, std::uint64_t b) { a += b; });
  TrialReport r = make_report("realizable", run, count);
  r.params = {{"n", nn},
              {"eps", eps},
              {"p_one", p},
              {"excess_risk", realizable_excess_risk(n, eps)},
              {"witness", realizable_witness(n, eps)}};
  r.exact = realizable_all_zero_probability(n);
  return r;
}

namespace {

double h_value(int h, int x, double C) {
  static const double h1[3] = {0.5, 0.5, -1.0};
  static const double h2[3] = {0.25, -1.0, 0.5};
  const double v = (h == 1 ? h1 : h2)[x - 1];
  return v < 0.0 ? std::exp2(-C) : v;
}

/// Base-2 loss of predicting 2^-C on a 0 label.
double tiny_zero_loss(double C) { return -std::log1p(-std::exp2(-C)) / std::numbers::ln2; }

}  // namespace

double agnostic_loss(int h, int x, int y, double C) {
  if ((h != 1 && h != 2) || x < 1 || x > 3 || (y != 0 && y != 1)) {
    throw ParameterError("agnostic_loss: h in {1,2}, x in {1,2,3}, y in {0,1}");
  }
  if ((h == 1 && x == 3) || (h == 2 && x == 2)) return y == 1 ? C : tiny_zero_loss(C);
  const double v = h_value(h, x, C);
  return y == 1 ? -std::log2(v) : -std::log2(1.0 - v);
}

double agnostic_risk_gap(double C, LogBase base) {
  if (!(C > 0.0)) throw ParameterError("C must be positive");
  const double third = 1.0 / 3.0;
  const double mass[3] = {third, third, 1.0 - 2.0 * third};
  const double p[3] = {0.5, 0.5, 0.5};
  const double h1[3] = {h_value(1, 1, C), h_value(1, 2, C), h_value(1, 3, C)};
  const double h2[3] = {h_value(2, 1, C), h_value(2, 2, C), h_value(2, 3, C)};
  const ExpectedRisk r1 = expected_risk(h1, p, mass, base);
  const ExpectedRisk r2 = expected_risk(h2, p, mass, base);
  return r2.value - r1.value;
}

AgnosticRisks agnostic_risks(const AgnosticCounts& c, double C) {
  const double beta = tiny_zero_loss(C);
  const auto d = [](std::uint64_t v) { return static_cast<double>(v); };
  AgnosticRisks r;
  r.h1[0] = d(c.n[0][0] + c.n[0][1]);
  r.h2[0] = d(c.n[0][0]) * std::log2(4.0 / 3.0) + 2.0 * d(c.n[0][1]);
  r.h1[1] = d(c.n[1][0] + c.n[1][1]);
  r.h2[1] = d(c.n[1][0]) * beta + d(c.n[1][1]) * C;
  r.h1[2] = d(c.n[2][0]) * beta + d(c.n[2][1]) * C;
  r.h2[2] = d(c.n[2][0] + c.n[2][1]);
  return r;
}

TrialReport agnostic_lb_trial(std::uint64_t n, double C, const RunOptions& run) {
  if (n == 0) throw ParameterError("n must be positive");
  check_trials(run);
  const double nn = static_cast<double>(n);
  if (!(C > std::sqrt(nn))) throw ParameterError("agnostic construction needs C > sqrt(n)");

  double loss[2][3][2];
  for (int h = 1; h <= 2; ++h) {
    for (int x = 1; x <= 3; ++x) {
      for (int y = 0; y <= 1; ++y) loss[h - 1][x - 1][y] = agnostic_loss(h, x, y, C);
    }
  }

  const std::uint64_t count = run_sharded<std::uint64_t>(
      run, 0,
      [&](std::uint64_t i, std::uint64_t& acc) {
        Philox4x32 rng(run.seed, i);
        AgnosticCounts counts;
        double direct1 = 0.0, direct2 = 0.0;
        for (std::uint64_t k = 0; k < n; ++k) {
          const std::uint32_t v = rng.below(6);
          const int x = static_cast<int>(v / 2);
          const int y = static_cast<int>(v % 2);
          ++counts.n[x][y];
          direct1 += loss[0][x][y];
          direct2 += loss[1][x][y];
        }
        const AgnosticRisks r = agnostic_risks(counts, C);
        const double t1 = r.total_h1();
        const double t2 = r.total_h2();
        if (std::abs(direct1 - t1) > 1e-12 * std::max(1.0, t1) ||
            std::abs(direct2 - t2) > 1e-12 * std::max(1.0, t2)) {
          throw InvariantError("empirical risk decomposition failed in trial " +
                               std::to_string(i));
        }
        if (t2 < t1) ++acc;
      },
      [](std::uint64_t& a, std::uint64_t b) { a += b; });
  TrialReport r = make_report("agnostic", run, count);
  r.params = {{"n", nn}, {"C", C}, {"risk_gap_bits", agnostic_risk_gap(C)},
              {"risk_gap_nats", agnostic_risk_gap(C, LogBase::e)}};
  return r;
}

double binom_gap_exact(std::uint64_t n) {
  if (n == 0) throw ParameterError("n must be positive");
  const double nn = static_cast<double>(n);
  const double threshold = 2.0 * std::sqrt(nn);
  const double log_sixth = std::log(1.0 / 6.0);
  const double log_rest = std::log(4.0 / 6.0);
  const double base = std::lgamma(nn + 1.0);
  double total = 0.0;
  for (std::uint64_t a = 0; a <= n; ++a) {
    for (std::uint64_t b = 0; a + b <= n; ++b) {
      if (!(static_cast<double>(a) - static_cast<double>(b) > threshold)) continue;
      const double c = static_cast<double>(n - a - b);
      const double da = static_cast<double>(a), db = static_cast<double>(b);
      total += std::exp(base - std::lgamma(da + 1.0) - std::lgamma(db + 1.0) -
                        std::lgamma(c + 1.0) + (da + db) * log_sixth + c * log_rest);
    }
  }
  return total;
}

BinomGapResult binom_gap_trial(std::uint64_t n, const RunOptions& run) {
  if (n == 0) throw ParameterError("n must be positive");
  check_trials(run);
  const double threshold = 2.0 * std::sqrt(static_cast<double>(n));
  using Table = std::vector<std::uint64_t>;
  const std::size_t side = n + 1;
  const Table joint = run_sharded<Table>(
      run, Table(side * side, 0),
      [&](std::uint64_t i, Table& acc) {
        Philox4x32 rng(run.seed, i);
        std::uint64_t a = 0, b = 0;
        for (std::uint64_t k = 0; k < n; ++k) {
          const std::uint32_t v = rng.below(6);
          if (v == 0) ++a;
          if (v == 1) ++b;
        }
        ++acc[a * side + b];
      },
      [](Table& a, const Table& b) {
        for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
      });

  BinomGapResult out;
  out.joint.assign(side, std::vector<std::uint64_t>(side, 0));
  std::uint64_t successes = 0;
  for (std::size_t a = 0; a < side; ++a) {
    for (std::size_t b = 0; b < side; ++b) {
      out.joint[a][b] = joint[a * side + b];
      if (static_cast<double>(a) - static_cast<double>(b) > threshold) successes += joint[a * side + b];
    }
  }
  out.report = make_report("binom-gap", run, successes);
  out.report.params = {{"n", static_cast<double>(n)}, {"threshold", threshold}};
  out.report.exact = binom_gap_exact(n);
  return out;
}

std::vector<AssociationCell> negative_association_check(const BinomGapResult& r,
                                                        const std::vector<std::uint64_t>& s_grid,
                                                        const std::vector<std::uint64_t>& t_grid) {
  const std::size_t side = r.joint.size();
  const double trials = static_cast<double>(r.report.trials);
  if (side == 0 || trials == 0) throw ParameterError("negative_association_check: no trials");
  std::vector<AssociationCell> cells;
  for (std::uint64_t s : s_grid) {
    for (std::uint64_t t : t_grid) {
      std::uint64_t joint = 0, left = 0, right = 0;
      for (std::size_t a = 0; a < side; ++a) {
        for (std::size_t b = 0; b < side; ++b) {
          const std::uint64_t c = r.joint[a][b];
          if (a >= s) left += c;
          if (b <= t) right += c;
          if (a >= s && b <= t) joint += c;
        }
      }
      AssociationCell cell;
      cell.s = s;
      cell.t = t;
      cell.joint = static_cast<double>(joint) / trials;
      const double pl = static_cast<double>(left) / trials;
      const double pr = static_cast<double>(right) / trials;
      cell.product = pl * pr;
      const auto se = [&](double p) { return std::sqrt(p * (1.0 - p) / trials); };
      cell.stderr_ = se(cell.joint) + pr * se(pl) + pl * se(pr);
      cell.ok = cell.joint >= cell.product - 3.0 * cell.stderr_;
      cells.push_back(cell);
    }
  }
  return cells;
}

double generalization_bound(double n, double L, double d, double theta, double delta) {
  if (!(n >= 1.0) || !std::isfinite(n)) throw ParameterError("n must be >= 1");
  if (!(L >= 1.0) || !std::isfinite(L)) throw ParameterError("L must be >= 1");
  if (!(d >= 1.0) || !std::isfinite(d)) throw ParameterError("d must be >= 1");
  if (!(theta > 0.0 && theta < 0.5)) throw ParameterError("theta must lie in (0, 1/2)");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  constexpr double c_rad = 2520.0;
  const double complexity =
      2.0 * c_rad / theta * std::pow(L, d / (d + 1.0)) * std::pow(n, -1.0 / (d + 1.0));
  const double deviation = 3.0 * std::log(1.0 / theta) * std::sqrt(std::log(2.0 / delta) / (2.0 * n));
  return complexity + deviation;
}

double finite_class_bound(double theta, double n, double class_size, double delta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ParameterError("theta must be positive");
  if (!(n >= 1.0) || !std::isfinite(n)) throw ParameterError("n must be >= 1");
  if (!(class_size >= 1.0)) throw ParameterError("class size must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  return theta * std::sqrt(std::log(2.0 * class_size / delta) / (2.0 * n));
}

void write_report_csv(std::ostream& out, const TrialReport& r) {
  const auto old = out.precision(17);
  out << "# lipreg-lb-sim-report version=1\n";
  out << "# construction=" << r.construction << "\n";
  out << "# seed=" << r.seed << "\n";
  for (const auto& [k, v] : r.params) out << "# " << k << "=" << v << "\n";
  out << "trials,successes,estimate,wilson_lo,wilson_hi,exact\n";
  out << r.trials << ',' << r.successes << ',' << r.estimate << ',' << r.wilson.lo << ','
      << r.wilson.hi << ',';
  if (r.exact) out << *r.exact;
  out << '\n';
  out.precision(old);
}

void write_report_json(std::ostream& out, const TrialReport& r) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  nlohmann::json doc = {{"format", "lipreg-lb-sim-report"},
                        {"version", 1},
                        {"construction", r.construction},
                        {"seed", r.seed},
                        {"trials", r.trials},
                        {"successes", r.successes},
                        {"estimate", r.estimate},
                        {"wilson", {r.wilson.lo, r.wilson.hi}},
                        {"params", params}};
  doc["exact"] = r.exact ? nlohmann::json(*r.exact) : nlohmann::json(nullptr);
  out << doc.dump(2) << '\n';
}

}  // namespace lipreg
