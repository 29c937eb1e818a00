#pragma once

#include <stdexcept>
#include <string>

namespace crimefis {

// Exception hierarchy. The CLI maps each family onto a process exit code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or misuse of an API (mismatched lengths, empty inputs).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: empty calendar, bad config keys, label-set mismatch.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data. `line()` is the 1-based file line, or 0 if unknown.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A model that cannot be evaluated or deserialized.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a failed linear solve.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace crimefis
