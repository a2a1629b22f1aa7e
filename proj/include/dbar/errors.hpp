#pragma once

#include <stdexcept>
#include <string>

namespace dbar {

// Bad user-facing input: malformed files, out-of-range parameters,
// dimension mismatches. Maps to CLI exit code 2.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid boundary/electrode geometry.
struct GeometryError : InputError {
  explicit GeometryError(const std::string& msg) : InputError(msg) {}
};

// Inconsistent configuration (e.g. k-grid half-width below the
// truncation radius). Maps to CLI exit code 2.
struct ConfigError : InputError {
  explicit ConfigError(const std::string& msg) : InputError(msg) {}
};

// Numerical failure: singular systems, NaN/Inf in iterates,
// ill-conditioning. Maps to CLI exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dbar
