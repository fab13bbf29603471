#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lipreg/objective.hpp"

namespace lipreg {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion (z = 1.96 for 95%).
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                               double z = 1.959963984540054);

/// Outcome of a Monte-Carlo experiment.
struct TrialReport {
  std::string construction;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double estimate = 0.0;
  WilsonInterval wilson;
  /// Construction parameters in a fixed order (n, eps, C, ...).
  std::vector<std::pair<std::string, double>> params;
  /// Closed-form success probability, when one is known.
  std::optional<double> exact;
};

/// Trials are split over `threads` workers (0 = hardware concurrency). Trial i
/// always draws from Philox stream i under key `seed`, so the counts do not
/// depend on the thread count.
struct RunOptions {
  std::uint64_t seed = 1;
  std::uint64_t trials = 100000;
  unsigned threads = 0;
};

// Realizable construction: one point x with P(Y=1) = 1/(2n). A trial succeeds
// when all n labels are 0, which forces ERM down to the smallest value the class
// offers at x.

/// (1 - 1/(2n))^n.
double realizable_all_zero_probability(std::uint64_t n);

/// Binary entropy in nats.
double binary_entropy(double p);

/// Excess risk (nats) of predicting e^{-4 eps n} at x when P(Y=1) = 1/(2n).
double realizable_excess_risk(std::uint64_t n, double eps);

/// Lower bound 2 eps - H(1/(2n)) on realizable_excess_risk.
double realizable_witness(std::uint64_t n, double eps);

/// Requires e^{-4 eps n} < 1/2 and H(1/(2n)) <= eps.
TrialReport realizable_lb_trial(std::uint64_t n, double eps, const RunOptions& run);

// Agnostic construction: X uniform on {1,2,3}, Y a fair coin independent of X,
// and two hypotheses with base-2 losses
//   h1 = (1/2, 1/2, 2^-C),   h2 = (1/4, 2^-C, 1/2).

/// R(h2) - R(h1), computed from the expected risks of both hypotheses. Equals
/// (1/6) log(4/3) in the chosen base for every C > 0.
double agnostic_risk_gap(double C, LogBase base = LogBase::two);

/// Label counts N(x, y) of one sample, x in {1,2,3}, y in {0,1}.
struct AgnosticCounts {
  std::uint64_t n[3][2] = {{0, 0}, {0, 0}, {0, 0}};
};

/// Per-point empirical losses Rhat^x(h_i) (bits), x = 1..3, computed from the counts.
struct AgnosticRisks {
  double h1[3] = {0, 0, 0};
  double h2[3] = {0, 0, 0};
  double total_h1() const { return h1[0] + h1[1] + h1[2]; }
  double total_h2() const { return h2[0] + h2[1] + h2[2]; }
};

AgnosticRisks agnostic_risks(const AgnosticCounts& counts, double C);

/// Loss (bits) of hypothesis h (1 or 2) on one example.
double agnostic_loss(int h, int x, int y, double C);

/// Requires C > sqrt(n). A trial succeeds when n R_n(h2) < n R_n(h1). Each
/// trial also checks that summing per-example losses matches the per-point
/// decomposition; a mismatch throws InvariantError.
TrialReport agnostic_lb_trial(std::uint64_t n, double C, const RunOptions& run);

// Anti-concentration: n uniform draws over six symbols, X = #symbol 1,
// X' = #symbol 2. A trial succeeds when X - X' > 2 sqrt(n).

/// Exact P(X - X' > 2 sqrt(n)) by summing the trinomial (1/6, 1/6, 4/6) law.
double binom_gap_exact(std::uint64_t n);

struct BinomGapResult {
  TrialReport report;
  /// joint[a][b] = number of trials with X = a and X' = b.
  std::vector<std::vector<std::uint64_t>> joint;
};

BinomGapResult binom_gap_trial(std::uint64_t n, const RunOptions& run);

struct AssociationCell {
  std::uint64_t s = 0;
  std::uint64_t t = 0;
  double joint = 0.0;    ///< P(X >= s, X' <= t)
  double product = 0.0;  ///< P(X >= s) P(X' <= t)
  double stderr_ = 0.0;  ///< combined Monte-Carlo standard error
  bool ok = true;        ///< joint >= product - 3 stderr
};

/// Negative-association check on a grid of thresholds (s, t), from the joint counts.
std::vector<AssociationCell> negative_association_check(const BinomGapResult& r,
                                                        const std::vector<std::uint64_t>& s_grid,
                                                        const std::vector<std::uint64_t>& t_grid);

/// (2 * 2520 / theta) L^{d/(d+1)} n^{-1/(d+1)} + 3 ln(1/theta) sqrt(ln(2/delta) / (2n)).
/// Requires n >= 1, L >= 1, d >= 1, 0 < theta < 1/2, 0 < delta < 1.
double generalization_bound(double n, double L, double d, double theta, double delta);

/// theta sqrt(ln(2|H|/delta) / (2n)), where theta is the loss range in bits of a
/// 2^-theta truncated class. Requires theta > 0, n >= 1, |H| >= 1, 0 < delta < 1.
double finite_class_bound(double theta, double n, double class_size, double delta);

/// Machine-readable report: CSV with '#' header lines, or one JSON object.
void write_report_csv(std::ostream& out, const TrialReport& r);
void write_report_json(std::ostream& out, const TrialReport& r);

}  // namespace lipreg
