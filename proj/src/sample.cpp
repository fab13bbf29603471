#include "lipreg/sample.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lipreg/error.hpp"

namespace lipreg {

std::string to_string(InputMode mode) {
  return mode == InputMode::coordinates ? "coords" : "matrix";
}

InputMode parse_input_mode(const std::string& text) {
  if (text == "coords" || text == "coordinates") return InputMode::coordinates;
  if (text == "matrix" || text == "distance-matrix") return InputMode::distance_matrix;
  throw ParameterError("unknown input mode '" + text + "' (expected coords or matrix)");
}

void TruncationParams::validate() const {
  if (!(theta > 0.0 && theta < 0.5)) {
    throw ParameterError("theta must lie in (0, 1/2), got " + std::to_string(theta));
  }
  if (!(ddim >= 1.0) || !std::isfinite(ddim)) {
    throw ParameterError("doubling dimension must be >= 1, got " + std::to_string(ddim));
  }
}

double lp_distance(std::span<const double> a, std::span<const double> b, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }
  if (p == 1.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), p);
  return std::pow(s, 1.0 / p);
}

namespace {

void check_labels(std::span<const int> labels, std::size_t n) {
  if (labels.size() != n) {
    throw DataError("expected " + std::to_string(n) + " labels, got " +
                    std::to_string(labels.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw DataError("label must be 0 or 1, got " + std::to_string(labels[i]), i);
    }
  }
}

void check_distance_matrix(const Matrix& d) {
  const std::size_t n = d.rows();
  if (d.cols() != n) {
    throw DataError("distance matrix must be square, got " + std::to_string(n) + "x" +
                    std::to_string(d.cols()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = d(i, j);
      if (!std::isfinite(v)) throw DataError("distance is not finite", i, j);
      if (v < 0.0) throw DataError("negative distance " + std::to_string(v), i, j);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) throw DataError("diagonal entry must be 0", i, i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = d(i, j);
      const double b = d(j, i);
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::max(a, b))) {
        std::ostringstream msg;
        msg << std::setprecision(17) << "distance matrix is not symmetric: " << a << " vs " << b;
        throw DataError(msg.str(), i, j);
      }
    }
  }
}

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

}  // namespace

Sample Sample::build(InputMode mode, const Matrix& raw, std::span<const int> labels,
                     const LoadOptions& options, const Matrix* coords) {
  const std::size_t n = raw.rows();
  if (n == 0) throw DataError("sample is empty");
  check_labels(labels, n);
  check_distance_matrix(raw);

  double diameter = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) diameter = std::max(diameter, raw(i, j));
  }
  double scale = 1.0;
  if (options.normalize) {
    if (diameter > 0.0) scale = diameter;
  } else if (diameter > 1.0) {
    throw DataError("distances exceed 1 but normalization is disabled (diameter " +
                    std::to_string(diameter) + ")");
  }

  // Zero-distance points share one variable: |w_i - w_j| <= L*0 forces equality.
  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (raw(i, j) == 0.0) sets.unite(i, j);
    }
  }
  std::vector<std::size_t> slot(n, n);
  Sample s;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (slot[root] == n) {
      slot[root] = s.groups_.size();
      s.groups_.emplace_back();
    }
    s.groups_[slot[root]].push_back(i);
  }

  const std::size_t m = s.groups_.size();
  s.mode_ = mode;
  s.ones_.assign(m, 0.0);
  s.zeros_.assign(m, 0.0);
  for (std::size_t g = 0; g < m; ++g) {
    for (std::size_t i : s.groups_[g]) (labels[i] == 1 ? s.ones_ : s.zeros_)[g] += 1.0;
  }

  // The merged constraint is the tightest member pair, hence the min.
  s.distances_ = Matrix(m, m);
  for (std::size_t g = 0; g < m; ++g) {
    for (std::size_t h = g + 1; h < m; ++h) {
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t i : s.groups_[g]) {
        for (std::size_t j : s.groups_[h]) d = std::min(d, std::min(raw(i, j), raw(j, i)));
      }
      d /= scale;
      s.distances_(g, h) = d;
      s.distances_(h, g) = d;
    }
  }

  if (coords != nullptr) {
    s.coordinates_ = Matrix(m, coords->cols());
    for (std::size_t g = 0; g < m; ++g) {
      const auto src = coords->row(s.groups_[g].front());
      std::copy(src.begin(), src.end(), s.coordinates_.row(g).begin());
    }
  }
  s.p_norm_ = options.p_norm;
  s.scale_ = scale;
  s.original_size_ = n;
  return s;
}

Sample Sample::from_coordinates(const Matrix& coords, std::span<const int> labels,
                                const LoadOptions& options) {
  if (!(options.p_norm >= 1.0)) {
    throw ParameterError("p-norm exponent must be >= 1, got " + std::to_string(options.p_norm));
  }
  if (coords.cols() == 0) throw DataError("coordinate rows must have at least one column");
  const std::size_t n = coords.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < coords.cols(); ++c) {
      if (!std::isfinite(coords(i, c))) throw DataError("coordinate is not finite", i, c);
    }
  }
  Matrix raw(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      raw(i, j) = raw(j, i) = lp_distance(coords.row(i), coords.row(j), options.p_norm);
    }
  }
  return build(InputMode::coordinates, raw, labels, options, &coords);
}

Sample Sample::from_distances(const Matrix& distances, std::span<const int> labels,
                              const LoadOptions& options) {
  LoadOptions opts = options;
  opts.mode = InputMode::distance_matrix;
  return build(InputMode::distance_matrix, distances, labels, opts, nullptr);
}

Sample Sample::assemble(SampleParts parts) {
  const std::size_t m = parts.ones.size();
  if (m == 0) throw DataError("sample is empty");
  if (parts.zeros.size() != m || parts.distances.rows() != m || parts.groups.size() != m) {
    throw DataError("sample parts disagree on the number of points");
  }
  check_distance_matrix(parts.distances);
  std::size_t total = 0;
  std::vector<bool> seen;
  for (std::size_t g = 0; g < m; ++g) {
    const double c1 = parts.ones[g];
    const double c0 = parts.zeros[g];
    if (c1 < 0 || c0 < 0 || c1 != std::floor(c1) || c0 != std::floor(c0) || c1 + c0 < 1) {
      throw DataError("label counts must be non-negative integers with at least one label", g);
    }
    if (parts.groups[g].size() != static_cast<std::size_t>(c1 + c0)) {
      throw DataError("group size does not match its label counts", g);
    }
    total += parts.groups[g].size();
    for (std::size_t i : parts.groups[g]) {
      if (i >= seen.size()) seen.resize(i + 1, false);
      if (seen[i]) throw DataError("original index " + std::to_string(i) + " appears twice", g);
      seen[i] = true;
    }
    for (std::size_t h = 0; h < m; ++h) {
      if (h != g && !(parts.distances(g, h) > 0.0)) {
        throw DataError("merged points must be at positive distance", g, h);
      }
      if (parts.distances(g, h) > 1.0 + 1e-12) {
        throw DataError("normalized distance exceeds 1", g, h);
      }
    }
  }
  if (seen.size() != total) throw DataError("original indices are not contiguous");
  if (!(parts.scale > 0.0) || !std::isfinite(parts.scale)) {
    throw DataError("scale must be positive and finite");
  }
  if (parts.mode == InputMode::coordinates && parts.coordinates.rows() != m) {
    throw DataError("coordinate mode requires one coordinate row per point");
  }

  Sample s;
  s.mode_ = parts.mode;
  s.distances_ = std::move(parts.distances);
  s.ones_ = std::move(parts.ones);
  s.zeros_ = std::move(parts.zeros);
  s.groups_ = std::move(parts.groups);
  s.coordinates_ = std::move(parts.coordinates);
  s.p_norm_ = parts.p_norm;
  s.scale_ = parts.scale;
  s.original_size_ = total;
  return s;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& field, std::size_t line, std::size_t column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw DataError("line " + std::to_string(line) + ", column " + std::to_string(column + 1) +
                    ": not a number: '" + field + "'");
  }
  return v;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split(t);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError("line " + std::to_string(lineno) + ": ragged row with " +
                          std::to_string(fields.size()) + " fields, header has " +
                          std::to_string(table.header.size()),
                      table.rows.size());
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) row[c] = parse_number(fields[c], lineno, c);
    table.rows.push_back(std::move(row));
    table.lines.push_back(lineno);
  }
  if (!have_header) throw DataError("input has no header row");
  return table;
}

namespace {

std::vector<int> take_labels(const CsvTable& t) {
  std::vector<int> labels(t.rows.size());
  const std::size_t col = t.header.size() - 1;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double v = t.rows[i][col];
    if (v != 0.0 && v != 1.0) {
      throw DataError("line " + std::to_string(t.lines[i]) + ": label must be 0 or 1", i, col);
    }
    labels[i] = static_cast<int>(v);
  }
  return labels;
}

}  // namespace

Sample load_sample(std::istream& in, const LoadOptions& options) {
  const CsvTable t = read_csv(in);
  if (t.header.size() < 2) throw DataError("need at least one data column and a label column");
  if (t.rows.empty()) throw DataError("input has no data rows");
  const std::vector<int> labels = take_labels(t);
  const std::size_t n = t.rows.size();
  const std::size_t width = t.header.size() - 1;

  if (options.mode == InputMode::coordinates) {
    Matrix coords(n, width);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(t.rows[i].begin(), width, coords.row(i).begin());
    }
    return Sample::from_coordinates(coords, labels, options);
  }
  if (width != n) {
    throw DataError("matrix mode needs " + std::to_string(n) + " distance columns, found " +
                    std::to_string(width));
  }
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) std::copy_n(t.rows[i].begin(), n, d.row(i).begin());
  return Sample::from_distances(d, labels, options);
}

void write_sample(std::ostream& out, const Sample& s) {
  // Expand each merged point back into one row per original label.
  std::vector<std::size_t> point;
  std::vector<int> label;
  for (std::size_t g = 0; g < s.size(); ++g) {
    for (int k = 0; k < static_cast<int>(s.ones()[g]); ++k) {
      point.push_back(g);
      label.push_back(1);
    }
    for (int k = 0; k < static_cast<int>(s.zeros()[g]); ++k) {
      point.push_back(g);
      label.push_back(0);
    }
  }
  const std::size_t rows = point.size();
  const auto old_precision = out.precision(17);

  if (s.mode() == InputMode::coordinates) {
    const std::size_t k = s.coordinates().cols();
    for (std::size_t c = 0; c < k; ++c) out << 'x' << (c + 1) << ',';
    out << "label\n";
    for (std::size_t r = 0; r < rows; ++r) {
      for (double v : s.coordinates().row(point[r])) out << v << ',';
      out << label[r] << '\n';
    }
  } else {
    for (std::size_t c = 0; c < rows; ++c) out << 'd' << (c + 1) << ',';
    out << "label\n";
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < rows; ++c) {
        out << (point[r] == point[c] ? 0.0 : s.distance(point[r], point[c])) << ',';
      }
      out << label[r] << '\n';
    }
  }
  out.precision(old_precision);
}

std::vector<Triple> check_triangle_inequality(const Sample& s) {
  constexpr double tolerance = 1e-12;
  std::vector<Triple> bad;
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (s.distance(i, j) > s.distance(i, k) + s.distance(k, j) + tolerance) {
          bad.push_back({i, j, k});
        }
      }
    }
  }
  return bad;
}

double default_theta(std::size_t n, double ddim) {
  if (n == 0) throw ParameterError("sample size must be positive");
  if (!(ddim >= 1.0) || !std::isfinite(ddim)) {
    throw ParameterError("doubling dimension must be >= 1");
  }
  return std::min(std::pow(static_cast<double>(n), -1.0 / (ddim + 2.0)), 0.49);
}

}  // namespace lipreg
