#pragma once

#include <stdexcept>
#include <string>

namespace cqed {

// Invalid configuration, malformed input files, bad arguments.  The CLI maps
// this to exit code 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-convergence, out-of-range physics, degenerate fits.
// The CLI maps this to exit code 1.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cqed
