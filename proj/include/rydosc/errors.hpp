#pragma once

#include <stdexcept>

namespace rydosc {

// Error categories; the CLI maps them to exit codes
// (ConfigError -> 2, AccuracyError -> 3, DependencyError -> 4).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical-accuracy failures: solver non-convergence, propagation error
// above tolerance, classification outside the oscillation regime.
struct AccuracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A command needs outputs another command has not produced yet.
struct DependencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rydosc
