#pragma once

#include <stdexcept>
#include <string>

namespace arms {

/// Base for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query (raycast, planning) was issued from an invalid pose.
class InvalidQuery : public Error {
 public:
  using Error::Error;
};

/// Scenario generation could not satisfy its constraints.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// A* found no path between start and goal.
class PlanningError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration, weights, or data files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace arms
