#pragma once

#include <stdexcept>
#include <string>

namespace esc {

/// Invalid configuration. `field()` holds the dot-path of the offending
/// setting (e.g. "controller.T_s"), or is empty when no single field applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A closed-loop run stopped before reaching its horizon.
class SimulationAbort : public std::runtime_error {
 public:
  SimulationAbort(double t, const std::string& message)
      : std::runtime_error(message), t_(t) {}

  double time() const noexcept { return t_; }

 private:
  double t_;
};

/// A scenario or output file could not be opened.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace esc
