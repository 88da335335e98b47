#pragma once

#include <stdexcept>
#include <string>

namespace bandspike {

// Bad argument to an operation (index out of range, dimension mismatch, ...).
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Enumeration or brute-force evaluation would exceed its guard.
struct CapacityError : std::length_error {
  using std::length_error::length_error;
};

// A value violates a domain invariant (non-orthonormal spikes, infeasible mask).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bandspike
