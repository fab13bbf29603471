#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lipreg/error.hpp"
#include "lipreg/experiments.hpp"

using namespace lipreg;

namespace {

/// P(X - X' > 2 sqrt(n)) from the law of the difference, one draw at a time:
/// +1 and -1 with probability 1/6 each, 0 otherwise.
double gap_by_recursion(std::uint64_t n) {
  std::vector<double> p(2 * n + 1, 0.0);
  p[n] = 1.0;
  for (std::uint64_t k = 0; k < n; ++k) {
    std::vector<double> q(p.size(), 0.0);
    for (std::size_t d = 0; d < p.size(); ++d) {
      if (p[d] == 0.0) continue;
      q[d] += p[d] * 4.0 / 6.0;
      if (d + 1 < p.size()) q[d + 1] += p[d] / 6.0;
      if (d > 0) q[d - 1] += p[d] / 6.0;
    }
    p.swap(q);
  }
  double total = 0.0;
  const double threshold = 2.0 * std::sqrt(static_cast<double>(n));
  for (std::size_t d = 0; d < p.size(); ++d) {
    if (static_cast<double>(d) - static_cast<double>(n) > threshold) total += p[d];
  }
  return total;
}

/// Exact P(n R_n(h2) < n R_n(h1)) by enumerating every count table of n
/// uniform draws over {1,2,3} x {0,1}, with losses written out per cell.
double agnostic_flip_probability(int n, double C) {
  const double tiny = -std::log2(1.0 - std::exp2(-C));
  // cells (x,y): (1,0) (1,1) (2,0) (2,1) (3,0) (3,1)
  const double l1[6] = {1.0, 1.0, 1.0, 1.0, tiny, C};
  const double l2[6] = {std::log2(4.0 / 3.0), 2.0, tiny, C, 1.0, 1.0};
  std::vector<double> log_fact(n + 1, 0.0);
  for (int k = 1; k <= n; ++k) log_fact[k] = log_fact[k - 1] + std::log(k);
  const double log_cell = std::log(1.0 / 6.0);
  double total = 0.0;
  int c[6];
  auto recurse = [&](auto&& self, int cell, int left) -> void {
    if (cell == 5) {
      c[5] = left;
      double r1 = 0.0, r2 = 0.0, lp = log_fact[n] + n * log_cell;
      for (int k = 0; k < 6; ++k) {
        r1 += c[k] * l1[k];
        r2 += c[k] * l2[k];
        lp -= log_fact[c[k]];
      }
      if (r2 < r1) total += std::exp(lp);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      c[cell] = v;
      self(self, cell + 1, left - v);
    }
  };
  recurse(recurse, 0, n);
  return total;
}

bool inside(const WilsonInterval& w, double v) { return w.lo <= v && v <= w.hi; }

}  // namespace

TEST_CASE("Wilson score interval") {
  const double z = 1.959963984540054;
  for (auto [s, t] : {std::pair<std::uint64_t, std::uint64_t>{50, 100}, {3, 40}, {99, 100}, {0, 10}, {10, 10}}) {
    const WilsonInterval w = wilson_interval(s, t);
    const double p = static_cast<double>(s) / t;
    const double n = static_cast<double>(t);
    const double center = (p + z * z / (2 * n)) / (1 + z * z / n);
    const double half = z / (1 + z * z / n) * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
    CHECK(w.lo == doctest::Approx(std::max(0.0, center - half)).epsilon(1e-14));
    CHECK(w.hi == doctest::Approx(std::min(1.0, center + half)).epsilon(1e-14));
    CHECK(w.lo <= p);
    CHECK(w.hi >= p);
  }
  CHECK(wilson_interval(0, 10).lo == 0.0);
  CHECK(wilson_interval(0, 10).hi == doctest::Approx(z * z / (10 + z * z)));
  CHECK_THROWS_AS(wilson_interval(11, 10), ParameterError);
}

TEST_CASE("realizable construction closed forms") {
  CHECK(realizable_all_zero_probability(100) == doctest::Approx(std::pow(0.995, 100)).epsilon(1e-14));
  CHECK(realizable_all_zero_probability(100) == doctest::Approx(0.6058).epsilon(1e-4));
  CHECK(realizable_all_zero_probability(1000000) == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));
  for (std::uint64_t n = 1; n < 2000; n = n * 2 + 1) {
    CHECK(realizable_all_zero_probability(n + 1) > realizable_all_zero_probability(n));
    CHECK(realizable_all_zero_probability(n) < std::exp(-0.5));
  }
  CHECK(binary_entropy(0.5) == doctest::Approx(std::log(2.0)));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(0.1) == doctest::Approx(-0.1 * std::log(0.1) - 0.9 * std::log(0.9)));

  for (std::uint64_t n : {100u, 1000u, 10000u}) {
    for (double eps : {0.05, 0.1, 0.2}) {
      const double p = 1.0 / (2.0 * n);
      const double log_q = -4.0 * eps * n;
      const double kl = p * (std::log(p) - log_q) + (1 - p) * std::log((1 - p) / (1 - std::exp(log_q)));
      CHECK(realizable_excess_risk(n, eps) == doctest::Approx(kl).epsilon(1e-10));
      CHECK(realizable_witness(n, eps) == doctest::Approx(2 * eps - binary_entropy(p)).epsilon(1e-14));
      if (binary_entropy(p) <= eps) {
        CHECK(realizable_excess_risk(n, eps) >= realizable_witness(n, eps));
        CHECK(realizable_witness(n, eps) >= eps);
      }
    }
  }
}

TEST_CASE("realizable simulation matches its closed form") {
  RunOptions run;
  run.trials = 20000;
  run.seed = 5;
  const TrialReport r = realizable_lb_trial(100, 0.1, run);
  REQUIRE(r.exact);
  CHECK(inside(r.wilson, *r.exact));
  CHECK(r.construction == "realizable");
  CHECK(r.seed == 5u);
  CHECK(r.params.front().first == "n");

  CHECK_THROWS_AS(realizable_lb_trial(100, 0.001, run), ParameterError);  // e^{-0.4} > 1/2
  CHECK_THROWS_AS(realizable_lb_trial(2, 0.1, run), ParameterError);      // H(1/4) > 0.1
  run.trials = 0;
  CHECK_THROWS_AS(realizable_lb_trial(100, 0.1, run), ParameterError);
}

TEST_CASE("results do not depend on the thread count") {
  RunOptions run;
  run.trials = 10000;
  run.seed = 9;
  std::vector<std::uint64_t> counts;
  for (unsigned threads : {1u, 2u, 3u, 8u}) {
    run.threads = threads;
    counts.push_back(agnostic_lb_trial(36, 360, run).successes);
    counts.push_back(realizable_lb_trial(100, 0.1, run).successes);
    counts.push_back(binom_gap_trial(36, run).report.successes);
  }
  for (std::size_t i = 3; i < counts.size(); ++i) CHECK(counts[i] == counts[i % 3]);
  run.seed = 10;
  run.threads = 1;
  CHECK(agnostic_lb_trial(36, 360, run).successes != counts[0]);
}

TEST_CASE("agnostic risk gap") {
  const double bits = std::log2(4.0 / 3.0) / 6.0;
  const double nats = std::log(4.0 / 3.0) / 6.0;
  for (double C : {1.0, 10.0, 60.0, 360.0}) {
    CHECK(agnostic_risk_gap(C) == doctest::Approx(bits).epsilon(1e-12));
    CHECK(agnostic_risk_gap(C, LogBase::e) == doctest::Approx(nats).epsilon(1e-12));
  }
  CHECK(bits == doctest::Approx(0.06917).epsilon(1e-4));
  CHECK(nats == doctest::Approx(0.04795).epsilon(1e-4));
  CHECK(nats / bits == doctest::Approx(std::numbers::ln2));
  CHECK_THROWS_AS(agnostic_risk_gap(0.0), ParameterError);
}

TEST_CASE("agnostic per-example losses and decomposition") {
  CHECK(agnostic_loss(2, 2, 1, 3.0) == 3.0);
  CHECK(agnostic_loss(1, 3, 1, 7.0) == 7.0);
  CHECK(agnostic_loss(1, 1, 0, 5.0) == 1.0);
  CHECK(agnostic_loss(2, 1, 1, 5.0) == doctest::Approx(2.0));
  CHECK(agnostic_loss(2, 1, 0, 5.0) == doctest::Approx(std::log2(4.0 / 3.0)));
  CHECK(agnostic_loss(2, 2, 0, 5.0) == doctest::Approx(-std::log2(1 - std::exp2(-5.0))));
  CHECK_THROWS_AS(agnostic_loss(3, 1, 0, 5.0), ParameterError);
  CHECK_THROWS_AS(agnostic_loss(1, 4, 0, 5.0), ParameterError);

  std::mt19937_64 g(97);
  for (int trial = 0; trial < 200; ++trial) {
    AgnosticCounts c;
    double direct1 = 0.0, direct2 = 0.0;
    const double C = 1.0 + (g() % 100);
    for (int k = 0; k < 40; ++k) {
      const int x = static_cast<int>(g() % 3), y = static_cast<int>(g() % 2);
      ++c.n[x][y];
      direct1 += agnostic_loss(1, x + 1, y, C);
      direct2 += agnostic_loss(2, x + 1, y, C);
    }
    const AgnosticRisks r = agnostic_risks(c, C);
    CHECK(r.total_h1() == doctest::Approx(direct1).epsilon(1e-12));
    CHECK(r.total_h2() == doctest::Approx(direct2).epsilon(1e-12));
  }

  RunOptions run;
  run.trials = 100;
  CHECK_THROWS_AS(agnostic_lb_trial(36, 6.0, run), ParameterError);
  CHECK_NOTHROW(agnostic_lb_trial(36, 6.01, run));
}

TEST_CASE("agnostic simulation matches exact enumeration") {
  const double exact = agnostic_flip_probability(36, 360.0);
  CHECK(exact > 0.1);
  RunOptions run;
  run.trials = 50000;
  run.seed = 3;
  const TrialReport r = agnostic_lb_trial(36, 360.0, run);
  CHECK(inside(r.wilson, exact));
  CHECK(r.params[2].first == "risk_gap_bits");
  CHECK(r.params[3].first == "risk_gap_nats");
}

TEST_CASE("trinomial gap probability") {
  CHECK(binom_gap_exact(1) == 0.0);
  for (std::uint64_t n : {1u, 4u, 9u, 16u, 36u, 50u}) {
    CHECK(binom_gap_exact(n) == doctest::Approx(gap_by_recursion(n)).epsilon(1e-10));
  }
  CHECK(binom_gap_exact(36) > 0.0);

  RunOptions run;
  run.trials = 1;
  CHECK(binom_gap_trial(1, run).report.estimate == 0.0);

  run.trials = 200000;
  run.seed = 11;
  const BinomGapResult r = binom_gap_trial(36, run);
  CHECK(r.report.successes > 0);
  CHECK(inside(r.report.wilson, binom_gap_exact(36)));
  std::uint64_t total = 0;
  for (const auto& row : r.joint) {
    for (auto v : row) total += v;
  }
  CHECK(total == run.trials);

  for (const AssociationCell& c : negative_association_check(r, {4, 6, 8, 10}, {2, 4, 6, 8})) {
    CHECK(c.ok);
    CHECK(c.stderr_ > 0.0);
  }
}

TEST_CASE("generalization bound diagnostics") {
  double last = std::numeric_limits<double>::infinity();
  for (double n = 10; n < 1e9; n *= 10) {
    const double b = generalization_bound(n, 2.0, 1.0, 0.1, 0.05);
    CHECK(b < last);
    CHECK(b > 0.0);
    last = b;
  }
  last = 0.0;
  for (double theta = 0.45; theta > 1e-6; theta /= 3) {
    const double b = generalization_bound(1e4, 2.0, 2.0, theta, 0.05);
    CHECK(b > last);
    last = b;
  }
  const double n = 1000, L = 3, d = 2, theta = 0.1, delta = 0.05;
  CHECK(generalization_bound(n, L, d, theta, delta) ==
        doctest::Approx(5040 / theta * std::pow(L, 2.0 / 3.0) * std::pow(n, -1.0 / 3.0) +
                        3 * std::log(10.0) * std::sqrt(std::log(40.0) / 2000.0)));
  CHECK_THROWS_AS(generalization_bound(0.5, 2, 1, 0.1, 0.05), ParameterError);
  CHECK_THROWS_AS(generalization_bound(10, 0.5, 1, 0.1, 0.05), ParameterError);
  CHECK_THROWS_AS(generalization_bound(10, 2, 0.5, 0.1, 0.05), ParameterError);
  CHECK_THROWS_AS(generalization_bound(10, 2, 1, 0.5, 0.05), ParameterError);
  CHECK_THROWS_AS(generalization_bound(10, 2, 1, 0.1, 1.0), ParameterError);

  // 10 * sqrt(ln 8 / 400)
  CHECK(finite_class_bound(10, 200, 2, 0.5) == doctest::Approx(0.7210).epsilon(1e-3));
  CHECK(finite_class_bound(10, 200, 2, 0.5) ==
        doctest::Approx(10 * std::sqrt(std::log(8.0) / 400.0)).epsilon(1e-14));
  for (double m = 10; m < 1e7; m *= 10) {
    CHECK(finite_class_bound(std::pow(m, 0.4), 10 * m, 2, 0.05) <
          finite_class_bound(std::pow(m / 10, 0.4), m, 2, 0.05));
  }
  CHECK_THROWS_AS(finite_class_bound(10, 200, 2, 1.0), ParameterError);
}

TEST_CASE("report writers") {
  TrialReport r;
  r.construction = "realizable";
  r.seed = 7;
  r.trials = 10;
  r.successes = 6;
  r.estimate = 0.6;
  r.wilson = wilson_interval(6, 10);
  r.params = {{"n", 100}, {"eps", 0.1}};
  r.exact = 0.6058;

  std::ostringstream csv;
  write_report_csv(csv, r);
  const std::string text = csv.str();
  CHECK(text.rfind("# lipreg-lb-sim-report version=1\n", 0) == 0);
  CHECK(text.find("# seed=7\n") != std::string::npos);
  CHECK(text.find("# n=100\n") != std::string::npos);
  const std::string columns = "trials,successes,estimate,wilson_lo,wilson_hi,exact\n";
  const auto at = text.find(columns);
  REQUIRE(at != std::string::npos);
  std::istringstream row(text.substr(at + columns.size()));
  std::string cell;
  std::vector<double> values;
  while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
  REQUIRE(values.size() == 6);
  CHECK(values[0] == 10);
  CHECK(values[1] == 6);
  CHECK(values[2] == 0.6);
  CHECK(values[3] == r.wilson.lo);
  CHECK(values[4] == r.wilson.hi);
  CHECK(values[5] == 0.6058);

  std::ostringstream js;
  write_report_json(js, r);
  const auto doc = nlohmann::json::parse(js.str());
  CHECK(doc["format"] == "lipreg-lb-sim-report");
  CHECK(doc["seed"] == 7);
  CHECK(doc["params"]["eps"] == 0.1);
  CHECK(doc["exact"] == 0.6058);
  r.exact.reset();
  std::ostringstream js2;
  write_report_json(js2, r);
  CHECK(nlohmann::json::parse(js2.str())["exact"].is_null());
}
