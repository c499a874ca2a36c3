#pragma once
#include <stdexcept>
#include <string>

namespace relloc {

// Argument and grid validation failures (caller bugs, exit code 1 in the CLI).
struct invalid_dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct invalid_grid_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct invalid_parameter_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Runtime failures of the simulation itself (exit code 2 in the CLI).

/// The post-event norm fell below 1e-300: the collapse multiplier
/// annihilated the entire state (grid pathology, not physics).
struct degenerate_collapse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A half-space restriction found less than 1e-12 probability mass.
struct empty_half_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Both hypothesis likelihoods underflowed (< 1e-300) at the measured value.
struct zero_likelihood_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace relloc
