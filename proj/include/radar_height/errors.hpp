#pragma once

#include <stdexcept>
#include <string>

namespace radar_height {

// Failure categories. The CLI maps each one to its own exit code.
enum class ErrorKind {
  kConfig = 2,
  kIo = 3,
  kNumeric = 4,
  kFormat = 5,
  kNotImplemented = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

/// Malformed or unrecognized file content (parse errors, schema versions, invariant violations on load).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorKind::kFormat, what) {}
};

class NotImplementedError : public Error {
 public:
  explicit NotImplementedError(const std::string& what) : Error(ErrorKind::kNotImplemented, what) {}
};

}  // namespace radar_height
