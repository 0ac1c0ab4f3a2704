#pragma once

#include <stdexcept>
#include <string>

namespace truckmorl {

/// Invalid or inconsistent configuration (bad sizes, out-of-range parameters, malformed files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The caller broke an operation's precondition (masked action, backward without forward, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Every action of a distribution was masked out.
class InvalidMaskError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// NaN or Inf reached a place where it must never appear.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing, truncated or incompatible checkpoint data.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace truckmorl
