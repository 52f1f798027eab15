#pragma once

#include <stdexcept>
#include <string>

namespace arisppo {

/// Malformed or out-of-range configuration. The message names the field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mismatched vector or matrix dimensions between collaborating objects.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation not valid in the object's current state (finished episode,
/// stale forward cache, exhausted search budget, ...).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Training produced NaN/Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace arisppo
