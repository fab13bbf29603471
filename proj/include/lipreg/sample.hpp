#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lipreg/matrix.hpp"

namespace lipreg {

enum class InputMode { coordinates, distance_matrix };

std::string to_string(InputMode mode);
InputMode parse_input_mode(const std::string& text);

struct LoadOptions {
  InputMode mode = InputMode::coordinates;
  /// Exponent of the l_p norm used in coordinate mode; +inf selects the max norm.
  double p_norm = 2.0;
  /// Rescale distances so the diameter is 1. Disable for pre-normalized input.
  bool normalize = true;
};

/// Truncation level theta and the doubling dimension it was derived from.
struct TruncationParams {
  double theta;
  double ddim;

  void validate() const;
};

/// Already-validated pieces of a sample; used when restoring a saved model.
struct SampleParts {
  InputMode mode = InputMode::distance_matrix;
  Matrix distances;
  Vector ones;
  Vector zeros;
  std::vector<std::vector<std::size_t>> groups;
  Matrix coordinates;
  double p_norm = 2.0;
  double scale = 1.0;
};

/// Labeled points with pairwise distances after duplicate merging.
///
/// Points at distance 0 collapse to one entry carrying the number of 1-labels
/// (`ones`) and 0-labels (`zeros`) among the originals. Distances are divided
/// by `scale()` so the diameter is at most 1. Immutable once built.
class Sample {
 public:
  static Sample from_coordinates(const Matrix& coords, std::span<const int> labels,
                                 const LoadOptions& options);
  static Sample from_distances(const Matrix& distances, std::span<const int> labels,
                               const LoadOptions& options);
  /// Re-validates `parts`; throws DataError if any sample invariant fails.
  static Sample assemble(SampleParts parts);

  /// Number of merged points (optimization variables).
  std::size_t size() const noexcept { return ones_.size(); }
  /// Number of rows originally loaded.
  std::size_t original_size() const noexcept { return original_size_; }

  InputMode mode() const noexcept { return mode_; }
  const Matrix& distances() const noexcept { return distances_; }
  double distance(std::size_t i, std::size_t j) const noexcept { return distances_(i, j); }

  const Vector& ones() const noexcept { return ones_; }
  const Vector& zeros() const noexcept { return zeros_; }
  double weight(std::size_t i) const noexcept { return ones_[i] + zeros_[i]; }

  /// Original row indices folded into each merged point (sorted; first is the representative).
  const std::vector<std::vector<std::size_t>>& groups() const noexcept { return groups_; }

  /// Representative coordinates (coordinate mode only; otherwise empty).
  const Matrix& coordinates() const noexcept { return coordinates_; }
  double p_norm() const noexcept { return p_norm_; }
  /// Raw distance = normalized distance * scale.
  double scale() const noexcept { return scale_; }

 private:
  Sample() = default;
  static Sample build(InputMode mode, const Matrix& raw, std::span<const int> labels,
                      const LoadOptions& options, const Matrix* coords);

  InputMode mode_ = InputMode::distance_matrix;
  Matrix distances_;
  Vector ones_;
  Vector zeros_;
  std::vector<std::vector<std::size_t>> groups_;
  Matrix coordinates_;
  double p_norm_ = 2.0;
  double scale_ = 1.0;
  std::size_t original_size_ = 0;
};

/// Parsed CSV: header names plus numeric rows. '#' lines and blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  /// 1-based line number of each data row in the source.
  std::vector<std::size_t> lines;
};

CsvTable read_csv(std::istream& in);

/// Reads a training file: coordinate mode expects `x1..xk,label`, matrix mode
/// `d1..dn,label` with row i holding distances from point i.
Sample load_sample(std::istream& in, const LoadOptions& options);

/// Writes `s` in its own input format (duplicates expanded back into rows) so
/// that load_sample reproduces the same distances and label counts.
void write_sample(std::ostream& out, const Sample& s);

/// l_p distance between two coordinate rows.
double lp_distance(std::span<const double> a, std::span<const double> b, double p);

struct Triple {
  std::size_t i, j, k;
  bool operator==(const Triple&) const = default;
};

/// All (i, j, k) with i < j, k distinct, and d(i,j) > d(i,k) + d(k,j) + 1e-12.
std::vector<Triple> check_triangle_inequality(const Sample& s);

/// Truncation level min(n^(-1/(ddim+2)), 0.49).
double default_theta(std::size_t n, double ddim);

}  // namespace lipreg
