#include "lipreg/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lipreg/error.hpp"
#include "lipreg/kernels.hpp"

namespace lipreg {

using json = nlohmann::ordered_json;

Model::Model(Sample sample, Vector w_star, double lipschitz, double theta, double ddim,
             FitSummary fit)
    : sample_(std::move(sample)),
      w_star_(std::move(w_star)),
      lipschitz_(lipschitz),
      theta_(theta),
      ddim_(ddim),
      fit_(fit) {
  if (!(lipschitz_ > 0.0) || !std::isfinite(lipschitz_)) {
    throw ModelFormatError("Lipschitz constant must be positive");
  }
  if (!(theta_ > 0.0 && theta_ < 0.5)) throw ModelFormatError("theta must lie in (0, 1/2)");
  if (!(ddim_ >= 1.0)) throw ModelFormatError("doubling dimension must be >= 1");
  const std::size_t n = sample_.size();
  if (w_star_.size() != n) {
    throw ModelFormatError("w_star has " + std::to_string(w_star_.size()) + " entries, sample has " +
                           std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w_star_[i] >= theta_ && w_star_[i] <= 1.0 - theta_)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "w_star[" << i << "] = " << w_star_[i] << " is outside [theta, 1-theta] = ["
          << theta_ << ", " << 1.0 - theta_ << "]";
      throw ModelFormatError(msg.str());
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double gap = std::abs(w_star_[i] - w_star_[j]);
      const double allowed = lipschitz_ * sample_.distance(i, j) + 1e-9;
      if (gap > allowed) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "Lipschitz condition violated for pair (" << i << ", " << j << "): |w_i - w_j| = "
            << gap << " > L * rho = " << allowed - 1e-9;
        throw ModelFormatError(msg.str());
      }
    }
  }
}

namespace {

void check_distances(std::span<const double> w, std::span<const double> rho) {
  if (w.empty()) throw ParameterError("extension needs at least one sample point");
  if (rho.size() != w.size()) {
    throw DataError("query has " + std::to_string(rho.size()) + " distances, model has " +
                    std::to_string(w.size()) + " points");
  }
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] >= 0.0) || !std::isfinite(rho[i])) {
      throw DataError("distance to sample point must be finite and non-negative", i);
    }
  }
}

/// Value at a query that coincides with a sample point, if any.
std::optional<double> coincident_value(std::span<const double> w, std::span<const double> rho) {
  std::optional<double> hit;
  std::size_t first = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] != 0.0) continue;
    if (!hit) {
      hit = w[i];
      first = i;
    } else if (std::abs(*hit - w[i]) > 1e-12) {
      throw DataError("query is at distance 0 from sample points " + std::to_string(first) +
                      " and " + std::to_string(i) + ", which have different fitted values");
    }
  }
  return hit;
}

}  // namespace

double extend_by_pairs(std::span<const double> w, std::span<const double> rho) {
  check_distances(w, rho);
  if (auto hit = coincident_value(w, rho)) return *hit;
  const std::size_t n = w.size();
  if (n == 1) return w[0];

  double best_slope = -1.0;
  double best_y = w[0];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double denom = rho[i] + rho[j];
      const double slope = std::abs(w[i] - w[j]) / denom;
      const double y = (w[j] * rho[i] + w[i] * rho[j]) / denom;
      const double tie_band = 1e-12 * std::max(best_slope, 1e-300);
      if (std::abs(slope - best_slope) <= tie_band) {
        if (std::abs(y - best_y) > 1e-9) {
          throw InvariantError("tied steepest pairs give different extension values");
        }
        if (slope > best_slope) {
          best_slope = slope;
          best_y = y;
        }
      } else if (slope > best_slope) {
        best_slope = slope;
        best_y = y;
      }
    }
  }
  return best_y;
}

double extend_by_envelopes(std::span<const double> w, std::span<const double> rho) {
  check_distances(w, rho);
  if (auto hit = coincident_value(w, rho)) return *hit;
  const std::size_t n = w.size();
  const auto [wmin, wmax] = std::minmax_element(w.begin(), w.end());
  if (*wmax == *wmin) return *wmin;
  const double rmin = *std::min_element(rho.begin(), rho.end());

  const auto& k = kernels::active();
  double lower = 0.0, upper = 0.0;
  // Envelope gap is non-increasing in the slope and closes by this point.
  double lo = 0.0;
  double hi = (*wmax - *wmin) / (2.0 * rmin);
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    k.envelopes(w.data(), rho.data(), mid, n, &lower, &upper);
    if (lower > upper) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  k.envelopes(w.data(), rho.data(), hi, n, &lower, &upper);
  return 0.5 * (lower + upper);
}

double extend(const Model& m, std::span<const double> rho) {
  const double by_pairs = extend_by_pairs(m.w_star(), rho);
  const double by_envelopes = extend_by_envelopes(m.w_star(), rho);
  if (std::abs(by_pairs - by_envelopes) > 1e-9) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "extension routes disagree: pairs " << by_pairs << ", envelopes " << by_envelopes;
    throw InvariantError(msg.str());
  }
  return std::clamp(by_pairs, m.theta(), 1.0 - m.theta());
}

Queries load_queries(std::istream& in, InputMode mode) {
  const CsvTable t = read_csv(in);
  Queries q;
  q.mode = mode;
  std::size_t width = t.header.size();
  const bool labeled = !t.header.empty() && t.header.back() == "label";
  if (labeled) --width;
  q.rows = Matrix(t.rows.size(), width);
  if (labeled) q.labels.emplace(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    std::copy_n(t.rows[i].begin(), width, q.rows.row(i).begin());
    if (labeled) {
      const double v = t.rows[i].back();
      if (v != 0.0 && v != 1.0) throw DataError("label must be 0 or 1", i, width);
      (*q.labels)[i] = static_cast<int>(v);
    }
  }
  return q;
}

Vector distances_to_sample(const Model& m, std::span<const double> query) {
  const Sample& s = m.sample();
  Vector rho(s.size());
  if (s.mode() == InputMode::coordinates) {
    if (query.size() != s.coordinates().cols()) {
      throw DataError("query has " + std::to_string(query.size()) + " coordinates, model expects " +
                      std::to_string(s.coordinates().cols()));
    }
    for (std::size_t g = 0; g < s.size(); ++g) {
      rho[g] = lp_distance(query, s.coordinates().row(g), s.p_norm()) / s.scale();
    }
    return rho;
  }
  if (query.size() != s.original_size()) {
    throw DataError("distance row has " + std::to_string(query.size()) +
                    " entries, model was trained on " + std::to_string(s.original_size()) +
                    " points");
  }
  for (std::size_t g = 0; g < s.size(); ++g) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i : s.groups()[g]) {
      if (!(query[i] >= 0.0) || !std::isfinite(query[i])) {
        throw DataError("distance to training point " + std::to_string(i + 1) +
                        " must be finite and non-negative");
      }
      d = std::min(d, query[i]);
    }
    rho[g] = d / s.scale();
  }
  return rho;
}

Vector predict_batch(const Model& m, const Queries& q) {
  if (q.mode != m.sample().mode()) {
    throw ParameterError("query mode '" + to_string(q.mode) + "' does not match model mode '" +
                         to_string(m.sample().mode()) + "'");
  }
  Vector out(q.rows.rows());
  for (std::size_t r = 0; r < q.rows.rows(); ++r) {
    out[r] = extend(m, distances_to_sample(m, q.rows.row(r)));
  }
  return out;
}

double holdout_risk(const Model& m, const Queries& q) {
  if (!q.labels) throw DataError("holdout file needs a label column");
  if (q.rows.rows() == 0) throw DataError("holdout file has no rows");
  const Vector p = predict_batch(m, q);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    total -= (*q.labels)[i] == 1 ? std::log(p[i]) : std::log1p(-p[i]);
  }
  return total / static_cast<double>(p.size());
}

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, std::size_t cols_hint = 0) {
  if (!j.is_array()) throw ModelFormatError("expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows > 0 ? j.at(0).size() : cols_hint;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = j.at(i).get<std::vector<double>>();
    if (row.size() != cols) throw ModelFormatError("ragged matrix in model document");
    std::copy(row.begin(), row.end(), m.row(i).begin());
  }
  return m;
}

json p_norm_to_json(double p) { return std::isinf(p) ? json("inf") : json(p); }

double p_norm_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ModelFormatError("p_norm must be a number or \"inf\"");
  }
  return j.get<double>();
}

}  // namespace

void save_model(std::ostream& out, const Model& m) {
  const Sample& s = m.sample();
  json doc = {{"format", "lipreg-model"},
              {"version", 1},
              {"mode", to_string(s.mode())},
              {"lipschitz", m.lipschitz()},
              {"theta", m.theta()},
              {"ddim", m.ddim()},
              {"scale", s.scale()},
              {"points", s.size()},
              {"original_count", s.original_size()},
              {"w_star", m.w_star()},
              {"ones", s.ones()},
              {"zeros", s.zeros()},
              {"groups", s.groups()},
              {"fit",
               {{"iterations", m.fit().iterations},
                {"epsilon", m.fit().epsilon},
                {"epsilon_cert", m.fit().epsilon_cert},
                {"certified", m.fit().certified}}}};
  if (s.mode() == InputMode::coordinates) {
    doc["p_norm"] = p_norm_to_json(s.p_norm());
    doc["coordinates"] = matrix_to_json(s.coordinates());
  } else {
    doc["distances"] = matrix_to_json(s.distances());
  }
  out << doc.dump(2) << '\n';
}

Model load_model(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "lipreg-model") throw ModelFormatError("not a lipreg model document");
    if (doc.at("version") != 1) {
      throw ModelFormatError("unsupported model version " + doc.at("version").dump());
    }
    SampleParts parts;
    parts.mode = parse_input_mode(doc.at("mode").get<std::string>());
    parts.ones = doc.at("ones").get<Vector>();
    parts.zeros = doc.at("zeros").get<Vector>();
    parts.groups = doc.at("groups").get<std::vector<std::vector<std::size_t>>>();
    parts.scale = doc.at("scale").get<double>();
    const std::size_t m = parts.ones.size();
    if (doc.at("points").get<std::size_t>() != m) {
      throw ModelFormatError("'points' does not match the number of label counts");
    }
    if (parts.mode == InputMode::coordinates) {
      parts.p_norm = p_norm_from_json(doc.at("p_norm"));
      parts.coordinates = matrix_from_json(doc.at("coordinates"));
      if (parts.coordinates.rows() != m) throw ModelFormatError("coordinate rows != points");
      parts.distances = Matrix(m, m);
      for (std::size_t g = 0; g < m; ++g) {
        for (std::size_t h = g + 1; h < m; ++h) {
          const double d = lp_distance(parts.coordinates.row(g), parts.coordinates.row(h),
                                       parts.p_norm) /
                           parts.scale;
          parts.distances(g, h) = parts.distances(h, g) = d;
        }
      }
    } else {
      parts.distances = matrix_from_json(doc.at("distances"));
    }
    Sample sample = Sample::assemble(std::move(parts));
    if (doc.at("original_count").get<std::size_t>() != sample.original_size()) {
      throw ModelFormatError("'original_count' does not match the groups");
    }
    FitSummary fit;
    if (doc.contains("fit")) {
      const json& f = doc.at("fit");
      fit.iterations = f.value("iterations", std::size_t{0});
      fit.epsilon = f.value("epsilon", 0.0);
      fit.epsilon_cert = f.value("epsilon_cert", 0.0);
      fit.certified = f.value("certified", false);
    }
    return Model(std::move(sample), doc.at("w_star").get<Vector>(), doc.at("lipschitz").get<double>(),
                 doc.at("theta").get<double>(), doc.at("ddim").get<double>(), fit);
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model document: ") + e.what());
  } catch (const DataError& e) {
    throw ModelFormatError(std::string("model sample is invalid: ") + e.what());
  }
}

}  // namespace lipreg
