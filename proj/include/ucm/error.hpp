#pragma once

#include <stdexcept>
#include <string>

namespace ucm {

/// Base of every error the library raises for invalid input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model construction or reference errors (duplicate ids, unknown sensors,
/// overlapping guards, non-positive delays, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Scenario text that does not follow the schema. `line` is 1-based, 0 when
/// no position is known.
class ScenarioError : public Error {
 public:
  ScenarioError(std::size_t line, std::string field, const std::string& what)
      : Error(format(line, field, what)), line_(line), field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(std::size_t line, const std::string& field,
                            const std::string& what) {
    std::string msg;
    if (line > 0) msg += "line " + std::to_string(line) + ": ";
    if (!field.empty()) msg += field + ": ";
    return msg + what;
  }

  std::size_t line_;
  std::string field_;
};

}  // namespace ucm
