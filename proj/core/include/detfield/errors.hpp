#pragma once

#include <stdexcept>
#include <string>

namespace detfield {

// Bad user-facing configuration: unknown family, malformed window, missing key.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mathematically invalid request: parameter outside the family's constraint
// set, non-Hermitian matrix where a kernel is required, overlapping windows.
struct constraint_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A refinement ladder hit its cap without stabilising.
struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A Monte-Carlo gate (KS threshold, sigma band) was not met.
struct stat_gate_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace detfield
