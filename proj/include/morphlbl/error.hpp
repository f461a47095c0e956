#pragma once

#include <stdexcept>
#include <string>

namespace morphlbl {

// Exception hierarchy. The CLI maps each kind onto a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* code() const noexcept { return "internal"; }
};

// Bad flags or invalid configuration values.
class UsageError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "usage"; }
};

// Missing files, malformed input, dimension mismatches.
class DataError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "data"; }
};

// Non-finite values during training or evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "numeric"; }
};

}  // namespace morphlbl
