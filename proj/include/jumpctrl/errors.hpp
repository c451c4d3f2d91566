#pragma once

#include <stdexcept>
#include <string>

namespace jumpctrl {

// Thrown on malformed model/config input. CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a configured resource cap is exceeded (enumeration cap,
// truncated-space cap, regeneration cap ratio). CLI exit code 3.
struct ResourceCapError : std::runtime_error {
  explicit ResourceCapError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on numerical failure (ODE guard-box blow-up, non-convergent
// value iteration). CLI exit code 4.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace jumpctrl
