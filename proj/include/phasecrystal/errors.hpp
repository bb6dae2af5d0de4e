#pragma once

#include <stdexcept>
#include <string>

namespace phasecrystal {

/// Base class for all library errors. The CLI maps ConfigError subclasses to
/// exit code 2 and every other Error to exit code 3.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
  using Error::Error;
};

struct ParseError : ConfigError {
  using ConfigError::ConfigError;
};

struct ValidationError : ConfigError {
  using ConfigError::ConfigError;
};

struct NonConvergence : Error {
  using Error::Error;
};

struct CutoffTooSmall : Error {
  using Error::Error;
};

struct DomainTooSmall : Error {
  using Error::Error;
};

struct GapClosure : Error {
  using Error::Error;
};

struct SecularMismatch : Error {
  using Error::Error;
};

struct CollisionSingularity : Error {
  using Error::Error;
};

struct StepRejected : Error {
  using Error::Error;
};

struct InvalidSqueeze : Error {
  using Error::Error;
};

}  // namespace phasecrystal
