#pragma once

#include <stdexcept>
#include <string>

namespace geolift {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration: unknown catalog id, malformed scenario, missing seed path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its stated preconditions.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The manifold lacks the structure an operation needs (e.g. no metric).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A mathematical invariant failed during a computation. These are never
/// expected on a correct manifold and make the CLI exit nonzero.
class InvariantBreach : public Error {
 public:
  using Error::Error;
};

}  // namespace geolift
