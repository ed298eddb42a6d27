#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tablenet {

// Base of every error thrown by the library. `kind()` is the stable,
// machine-readable name surfaced by the CLI on stderr.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t row, std::size_t col, const std::string& detail)
      : Error("SchemaError", "schema anchor (" + std::to_string(row) + "," +
                                 std::to_string(col) + "): " + detail),
        row_(row),
        col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("ConfigError", message) {}
};

class DegenerateInput : public Error {
 public:
  explicit DegenerateInput(const std::string& message)
      : Error("DegenerateInput", message) {}
};

}  // namespace tablenet
