#pragma once

#include <stdexcept>
#include <string>

namespace cavilab {

/// Scenario/configuration problem: malformed file, unknown key, missing
/// section, mutually inconsistent values. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
  ConfigError(const std::string& file, int line, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + message) {}
};

/// Runtime numerical failure: non-convergent fit, unphysical slope,
/// undetectable feature. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace cavilab
