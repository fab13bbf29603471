#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace lipreg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data. Indices are zero-based; the message
/// spells them out one-based, the way a user counts rows in a file.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what,
                     std::optional<std::size_t> row = std::nullopt,
                     std::optional<std::size_t> column = std::nullopt);

  std::optional<std::size_t> row() const noexcept { return row_; }
  std::optional<std::size_t> column() const noexcept { return column_; }

 private:
  std::optional<std::size_t> row_;
  std::optional<std::size_t> column_;
};

/// A point handed to a function is outside that function's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside its documented range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Symmetric positive-definite factorization failed at `pivot`.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, std::size_t pivot);
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// An internal invariant broke; indicates a bug or a numerically hopeless input.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Model document is malformed or violates a model invariant.
class ModelFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace lipreg
