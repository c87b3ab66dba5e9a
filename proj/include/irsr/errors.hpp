#pragma once

#include <stdexcept>
#include <string>

namespace irsr {

// Failure taxonomy shared by the library and the CLI. The CLI maps each
// class to a distinct process exit code.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad parameter value (non-positive sigma, negative weight, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

// Shape or size mismatch between planes, tensors, or network stages.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration (schedules, manifests, class order).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid runtime input (missing masks, out-of-range probability, degenerate band).
class InputError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// File read/write failures, corrupt or truncated containers.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace irsr
