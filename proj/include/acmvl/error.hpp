#pragma once

#include <stdexcept>
#include <string>

namespace acmvl {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  /// Short machine-readable category, used as the CLI error prefix.
  virtual const char* kind() const noexcept { return "error"; }
};

/// Operand shapes are incompatible.
class ShapeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "shape"; }
};

/// A scalar or structural argument is out of its valid domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "argument"; }
};

/// An operation was invoked in the wrong lifecycle state.
class StateError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "state"; }
};

}  // namespace acmvl
