// lipreg: fit, apply and check truncated Lipschitz log-loss regressors.
//
// Exit codes: 0 success, 1 internal failure, 2 usage or validation error,
// 3 non-certified fit or failed check.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "lipreg/barrier.hpp"
#include "lipreg/error.hpp"
#include "lipreg/experiments.hpp"
#include "lipreg/kernels.hpp"
#include "lipreg/objective.hpp"
#include "lipreg/oracle.hpp"
#include "lipreg/predictor.hpp"
#include "lipreg/rng.hpp"
#include "lipreg/sample.hpp"
#include "lipreg/solver.hpp"

namespace {

using namespace lipreg;

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kUsage = 2;
constexpr int kNotCertified = 3;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot open '" + path + "' for writing");
  out.precision(17);
  return out;
}

double parse_p_norm(const std::string& text) {
  if (text == "inf" || text == "max") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(p >= 1.0)) {
    throw ParameterError("--p-norm must be a number >= 1 or 'inf', got '" + text + "'");
  }
  return p;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("LIPREG_SEED");
  if (!env || !*env) return 1;
  std::uint64_t v = 0;
  std::istringstream in(env);
  if (!(in >> v) || !in.eof()) throw ParameterError(std::string("LIPREG_SEED is not an integer: ") + env);
  return v;
}

struct FitArgs {
  std::string input;
  std::string mode = "coords";
  double lipschitz = 0.0;
  std::optional<double> theta;
  bool auto_theta = false;
  std::optional<double> ddim;
  double epsilon = 1e-4;
  std::string output;
  std::string trace;
  std::size_t max_iter = 0;
  std::string p_norm = "2";
  bool no_normalize = false;
};

int cmd_fit(const FitArgs& a) {
  LoadOptions lo;
  lo.mode = parse_input_mode(a.mode);
  lo.p_norm = parse_p_norm(a.p_norm);
  lo.normalize = !a.no_normalize;
  auto in = open_in(a.input);
  const Sample s = load_sample(in, lo);

  if (s.mode() == InputMode::distance_matrix) {
    const auto bad = check_triangle_inequality(s);
    if (!bad.empty()) {
      const Triple& t = bad.front();
      std::cerr << "warning: " << bad.size() << " triangle-inequality violations, e.g. d(" << t.i + 1
                << "," << t.j + 1 << ") > d(" << t.i + 1 << "," << t.k + 1 << ") + d(" << t.k + 1
                << "," << t.j + 1 << ")\n";
    }
  }

  double ddim = 1.0;
  if (a.ddim) {
    ddim = *a.ddim;
  } else if (s.mode() == InputMode::coordinates) {
    ddim = static_cast<double>(s.coordinates().cols());
  } else if (a.auto_theta) {
    throw ParameterError("--auto-theta in matrix mode needs --ddim");
  }
  const double theta = a.auto_theta ? default_theta(s.original_size(), ddim) : *a.theta;
  TruncationParams{theta, ddim}.validate();

  const Polytope p(s, a.lipschitz, theta);
  FitOptions fo;
  fo.epsilon = a.epsilon;
  fo.max_iter = a.max_iter;
  fo.record_trace = !a.trace.empty();
  std::optional<std::ofstream> trace_out;
  if (!a.trace.empty()) trace_out = open_out(a.trace);

  FitResult r;
  try {
    r = fit(s, p, fo);
  } catch (const FitError& e) {
    if (trace_out) {
      FitResult partial;
      partial.trace = e.trace();
      partial.nu = barrier_parameter(p);
      write_trace(*trace_out, partial, p, fo);
    }
    throw;
  }
  if (trace_out) write_trace(*trace_out, r, p, fo);

  FitSummary summary{r.iterations, a.epsilon, r.epsilon_cert, r.certified};
  const Model m(s, r.w_star, a.lipschitz, theta, ddim, summary);
  auto out = open_out(a.output);
  save_model(out, m);

  std::cout << "points        " << s.original_size() << " (" << s.size() << " after merging)\n"
            << "lipschitz     " << a.lipschitz << "\n"
            << "theta         " << theta << (a.auto_theta ? " (auto)" : "") << "\n"
            << "iterations    " << r.iterations << "\n"
            << "risk          " << risk_value(r.w_star, s) << " nats (total)\n"
            << "certified gap " << r.epsilon_cert << (r.certified ? "" : " (NOT certified)")
            << "\n";
  if (r.consistency_violations > 0) {
    std::cerr << "warning: " << r.consistency_violations
              << " iterations needed extra Newton steps to stay on the path\n";
  }
  return r.certified ? kOk : kNotCertified;
}

struct PredictArgs {
  std::string model;
  std::string queries;
  std::string output;
  std::string mode;
};

int cmd_predict(const PredictArgs& a) {
  auto min = open_in(a.model);
  const Model m = load_model(min);
  const InputMode mode = a.mode.empty() ? m.sample().mode() : parse_input_mode(a.mode);
  if (mode != m.sample().mode()) {
    throw ParameterError("query mode '" + a.mode + "' does not match model mode '" +
                         to_string(m.sample().mode()) + "'");
  }
  auto qin = open_in(a.queries);
  const Queries q = load_queries(qin, mode);
  const Vector pred = predict_batch(m, q);
  auto out = open_out(a.output);
  out << "# lipreg-predictions version=1\n"
      << "# model=" << a.model << "\n"
      << "# mode=" << to_string(mode) << " lipschitz=" << m.lipschitz() << " theta=" << m.theta()
      << "\n"
      << "id,probability\n";
  for (std::size_t i = 0; i < pred.size(); ++i) out << i + 1 << ',' << pred[i] << '\n';
  std::cout << "wrote " << pred.size() << " predictions to " << a.output << "\n";
  return kOk;
}

struct EvalArgs {
  std::string model;
  std::string test;
  double delta = 0.05;
  std::string output;
};

int cmd_eval(const EvalArgs& a) {
  auto min = open_in(a.model);
  const Model m = load_model(min);
  auto tin = open_in(a.test);
  const Queries q = load_queries(tin, m.sample().mode());
  const double risk = holdout_risk(m, q);
  const double n = static_cast<double>(m.sample().original_size());
  const double bound =
      generalization_bound(n, std::max(m.lipschitz(), 1.0), m.ddim(), m.theta(), a.delta);
  std::cout << "holdout rows      " << q.rows.rows() << "\n"
            << "holdout risk      " << risk << " nats per example\n"
            << "bound (delta=" << a.delta << ") " << bound << " (loose diagnostic)\n";
  if (!a.output.empty()) {
    auto out = open_out(a.output);
    out << "# lipreg-eval version=1\n# model=" << a.model << "\n# test=" << a.test
        << "\nrows,risk_nats,bound,delta\n"
        << q.rows.rows() << ',' << risk << ',' << bound << ',' << a.delta << '\n';
  }
  return kOk;
}

struct CheckArgs {
  std::uint64_t seed = 1;
  std::size_t instances = 50;
  std::size_t n_max = 10;
  double epsilon = 1e-4;
  double oracle_tol = 1e-7;
};

struct Instance {
  Sample sample;
  double lipschitz;
  double theta;
};

std::vector<Instance> bundled_instances() {
  std::vector<Instance> out;
  auto pair = [](double d, std::vector<int> y) {
    Matrix m(2, 2);
    m(0, 1) = m(1, 0) = d;
    return Sample::from_distances(m, y, {});
  };
  out.push_back({pair(1.0, {0, 1}), 0.1, 0.05});
  out.push_back({pair(1.0, {1, 1}), 0.8, 0.1});
  Matrix line(3, 1);
  line(1, 0) = 1.0;
  line(2, 0) = 2.0;
  const std::vector<int> y3{0, 1, 1};
  out.push_back({Sample::from_coordinates(line, y3, {}), 1.0, 0.1});
  return out;
}

Instance random_instance(std::uint64_t seed, std::uint64_t index, std::size_t n_max) {
  Philox4x32 rng(seed, index);
  const std::size_t n = 2 + rng.below(static_cast<std::uint32_t>(n_max - 1));
  Matrix c(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    c(i, 0) = rng.uniform();
    c(i, 1) = rng.uniform();
  }
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(2));
  const double thetas[3] = {0.05, 0.1, 0.2};
  const double lipschitz = 0.5 + 4.5 * rng.uniform();
  const double theta = thetas[rng.below(3)];
  return {Sample::from_coordinates(c, y, {}), lipschitz, theta};
}

int cmd_check(const CheckArgs& a) {
  if (a.n_max < 2 || a.n_max > 12) throw ParameterError("--n-max must lie in [2, 12]");
  std::vector<Instance> all = bundled_instances();
  for (std::uint64_t i = 0; i < a.instances; ++i) all.push_back(random_instance(a.seed, i, a.n_max));

  double max_gap = -std::numeric_limits<double>::infinity();
  double max_excess = -std::numeric_limits<double>::infinity();
  std::size_t violations = 0, failures = 0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const Instance& inst = all[k];
    const Polytope p(inst.sample, inst.lipschitz, inst.theta);
    FitOptions fo;
    fo.epsilon = a.epsilon;
    const FitResult r = fit(inst.sample, p, fo);
    OracleOptions oo;
    oo.tol = a.oracle_tol;
    const Vector w = oracle_solve(inst.sample, p, oo);
    const double gap = risk_value(r.w_star, inst.sample) - risk_value(w, inst.sample);
    max_gap = std::max(max_gap, gap);
    max_excess = std::max(max_excess, gap - r.epsilon_cert);
    violations += r.consistency_violations;
    const bool ok = r.certified && gap <= a.epsilon + a.oracle_tol && gap <= r.epsilon_cert + 1e-8;
    if (!ok) {
      ++failures;
      std::cerr << "instance " << k << " (n=" << inst.sample.size() << "): gap " << gap
                << ", certificate " << r.epsilon_cert << "\n";
    }
  }
  std::cout << "instances            " << all.size() << " (" << all.size() - a.instances
            << " bundled, seed " << a.seed << ")\n"
            << "max objective gap    " << max_gap << " nats\n"
            << "max gap - certificate " << max_excess << "\n"
            << "path violations      " << violations << "\n"
            << "result               " << (failures == 0 && violations == 0 ? "PASS" : "FAIL")
            << "\n";
  return failures == 0 && violations == 0 ? kOk : kNotCertified;
}

struct SimArgs {
  std::uint64_t n = 100;
  double eps = 0.05;
  double C = 0.0;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string output;
  std::string format = "csv";
};

int report_sim(const SimArgs& a, const TrialReport& r) {
  std::cout << "construction " << r.construction << "\n";
  for (const auto& [k, v] : r.params) std::cout << "  " << k << " = " << v << "\n";
  std::cout << "seed " << r.seed << ", trials " << r.trials << ", successes " << r.successes
            << "\n"
            << "estimate " << r.estimate << "  95% Wilson [" << r.wilson.lo << ", " << r.wilson.hi
            << "]\n";
  if (r.exact) std::cout << "exact    " << *r.exact << "\n";
  if (!a.output.empty()) {
    auto out = open_out(a.output);
    if (a.format == "json") {
      write_report_json(out, r);
    } else {
      write_report_csv(out, r);
    }
  }
  return kOk;
}

RunOptions run_options(const SimArgs& a) { return {a.seed, a.trials, a.threads}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated Lipschitz log-loss regression on metric data"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  std::string kernels_choice = "auto";
  app.add_option("--kernels", kernels_choice, "Kernel variant")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  std::uint64_t seed = 1;
  try {
    seed = default_seed();
  } catch (const lipreg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model to a labeled sample");
  fit_cmd->add_option("--input", fa.input, "Training CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--mode", fa.mode, "Input format")->check(CLI::IsMember({"coords", "matrix"}));
  fit_cmd->add_option("--lipschitz", fa.lipschitz, "Lipschitz constant L")
      ->required()
      ->check(CLI::PositiveNumber);
  auto* theta_opt = fit_cmd->add_option("--theta", fa.theta, "Truncation level in (0, 1/2)");
  auto* auto_opt =
      fit_cmd->add_flag("--auto-theta", fa.auto_theta, "Use theta = n^(-1/(ddim+2))");
  theta_opt->excludes(auto_opt);
  fit_cmd->add_option("--ddim", fa.ddim, "Doubling dimension (default: ambient dimension)");
  fit_cmd->add_option("--epsilon", fa.epsilon, "Target gap in nats of total risk")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--output", fa.output, "Model file to write")->required();
  fit_cmd->add_option("--trace", fa.trace, "Write a per-iteration JSON-lines trace");
  fit_cmd->add_option("--max-iter", fa.max_iter, "Iteration cap (0 = automatic)");
  fit_cmd->add_option("--p-norm", fa.p_norm, "l_p norm for coordinates (number >= 1 or inf)");
  fit_cmd->add_flag("--no-normalize", fa.no_normalize, "Input distances already have diameter <= 1");

  PredictArgs pa;
  auto* predict_cmd = app.add_subcommand("predict", "Predict at new points");
  predict_cmd->add_option("--model", pa.model)->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--queries", pa.queries)->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--output", pa.output)->required();
  predict_cmd->add_option("--mode", pa.mode, "Declared query format (must match the model)")
      ->check(CLI::IsMember({"coords", "matrix"}));

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Holdout log-loss and the generalization bound");
  eval_cmd->add_option("--model", ea.model)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--test", ea.test, "Labeled holdout CSV")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--delta", ea.delta, "Confidence parameter of the bound");
  eval_cmd->add_option("--output", ea.output, "Machine-readable CSV summary");

  CheckArgs ca;
  ca.seed = seed;
  auto* check_cmd = app.add_subcommand("check", "Compare the solver with the reference oracle");
  check_cmd->add_option("--seed", ca.seed);
  check_cmd->add_option("--instances", ca.instances);
  check_cmd->add_option("--n-max", ca.n_max);
  check_cmd->add_option("--epsilon", ca.epsilon)->check(CLI::PositiveNumber);
  check_cmd->add_option("--oracle-tol", ca.oracle_tol)->check(CLI::PositiveNumber);

  SimArgs sa;
  sa.seed = seed;
  auto* sim_cmd = app.add_subcommand("lb-sim", "Monte-Carlo lower-bound constructions");
  sim_cmd->require_subcommand(1);
  auto add_common = [&](CLI::App* c) {
    c->add_option("--n", sa.n, "Sample size")->check(CLI::PositiveNumber);
    c->add_option("--trials", sa.trials)->check(CLI::PositiveNumber);
    c->add_option("--seed", sa.seed);
    c->add_option("--threads", sa.threads, "Worker threads (0 = all cores)");
    c->add_option("--output", sa.output, "Report file");
    c->add_option("--format", sa.format)->check(CLI::IsMember({"csv", "json"}));
  };
  auto* sim_real = sim_cmd->add_subcommand("realizable", "All-zeros event of the one-point construction");
  add_common(sim_real);
  sim_real->add_option("--eps", sa.eps)->check(CLI::PositiveNumber);
  auto* sim_agn = sim_cmd->add_subcommand("agnostic", "ERM picks the worse of two hypotheses");
  add_common(sim_agn);
  sim_agn->add_option("--C", sa.C, "Exponent of the smallest prediction (default 10n)");
  auto* sim_gap = sim_cmd->add_subcommand("binom-gap", "P(X - X' > 2 sqrt(n)) over six symbols");
  add_common(sim_gap);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (kernels_choice == "scalar") kernels::force(kernels::Isa::scalar);
    if (kernels_choice == "avx2") kernels::force(kernels::Isa::avx2);

    if (fit_cmd->parsed()) {
      if (!fa.theta && !fa.auto_theta) throw ParameterError("one of --theta or --auto-theta is required");
      return cmd_fit(fa);
    }
    if (predict_cmd->parsed()) return cmd_predict(pa);
    if (eval_cmd->parsed()) return cmd_eval(ea);
    if (check_cmd->parsed()) return cmd_check(ca);
    if (sim_real->parsed()) return report_sim(sa, realizable_lb_trial(sa.n, sa.eps, run_options(sa)));
    if (sim_agn->parsed()) {
      if (sa.C == 0.0) sa.C = 10.0 * static_cast<double>(sa.n);
      return report_sim(sa, agnostic_lb_trial(sa.n, sa.C, run_options(sa)));
    }
    if (sim_gap->parsed()) return report_sim(sa, binom_gap_trial(sa.n, run_options(sa)).report);
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const ConditioningError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNotCertified;
  } catch (const OracleError& e) {
    std::cerr << "oracle error: " << e.what() << "\n";
    return kInternal;
  } catch (const lipreg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
