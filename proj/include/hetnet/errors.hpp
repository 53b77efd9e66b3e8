#pragma once

#include <stdexcept>
#include <string>

namespace hetnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range scenario / experiment configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Rejection sampling could not place a small cell or user.
class PlacementFailure : public Error {
public:
  using Error::Error;
};

/// A requested rate needs a power beyond double range.
class InfeasibleRate : public Error {
public:
  using Error::Error;
};

/// GABS bracketing or bisection ran out of steps.
class NonConvergence : public Error {
public:
  using Error::Error;
};

/// QoS floor above the backhaul/power cap for one user (L > H).
class InfeasibleUser : public Error {
public:
  using Error::Error;
};

/// The instance admits no allocation meeting the QoS floor.
class InfeasibleInstance : public Error {
public:
  using Error::Error;
};

/// Exhaustive oracle grid is too large to enumerate.
class BudgetExceeded : public Error {
public:
  using Error::Error;
};

} // namespace hetnet
