#pragma once

#include <stdexcept>
#include <string>

namespace pullin {

// Malformed or non-physical user input (schema violations, invalid values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear algebra or integration breakdown that a caller cannot recover from.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The beam touched the counter-electrode (local gap <= 0).
class ContactSignal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mesh morphing produced an inverted or degenerate triangle.
class RemeshSignal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every voltage of a sweep converged, so no pull-in bracket exists.
class NoPullInFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pullin
