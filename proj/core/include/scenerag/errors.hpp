#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scenerag {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments, detected before any side effect.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (e.g. latitude > 90).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A record failed schema validation. `line` is 1-based, 0 when not line-oriented.
class ValidationError : public Error {
 public:
  ValidationError(std::size_t line, std::string field, const std::string& reason);

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(std::string id);
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class DimensionMismatchError : public Error {
 public:
  DimensionMismatchError(std::size_t expected, std::size_t actual);
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Persisted data is not in the expected format (bad magic, unparsable manifest).
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionMismatchError : public FormatError {
 public:
  VersionMismatchError(std::string what_file, long long found, long long expected);
  long long found() const noexcept { return found_; }
  long long expected() const noexcept { return expected_; }

 private:
  long long found_;
  long long expected_;
};

/// Persisted data is structurally valid but inconsistent (truncation, count mismatch).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// A remote endpoint answered with something that violates the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Connection failure or timeout after all retry attempts were spent.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Non-2xx response. 5xx responses are retried before this is thrown.
class HttpStatusError : public Error {
 public:
  HttpStatusError(int status, std::string body_excerpt);
  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

}  // namespace scenerag
