#pragma once

#include <stdexcept>
#include <string>

namespace ecd {

// Bad argument to a pure computation (empty utility vector, NaN, size mismatch).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Scenario or parameter set that violates its invariants.
class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent configuration (category config, targets, bounds).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Failure while reading an input file; carries the 1-based line when known.
class LoadError : public std::runtime_error {
 public:
  LoadError(const std::string& what, long line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

}  // namespace ecd
