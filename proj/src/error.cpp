#include "lipreg/error.hpp"

namespace lipreg {

namespace {

std::string locate(const std::string& what, std::optional<std::size_t> row,
                   std::optional<std::size_t> column) {
  if (row && column) {
    return "(" + std::to_string(*row + 1) + "," + std::to_string(*column + 1) + "): " + what;
  }
  if (row) return "row " + std::to_string(*row + 1) + ": " + what;
  return what;
}

}  // namespace

DataError::DataError(const std::string& what, std::optional<std::size_t> row,
                     std::optional<std::size_t> column)
    : Error(locate(what, row, column)), row_(row), column_(column) {}

ConditioningError::ConditioningError(const std::string& what, std::size_t pivot)
    : Error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}

}  // namespace lipreg
