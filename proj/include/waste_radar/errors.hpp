#pragma once

#include <stdexcept>
#include <string>

namespace waste_radar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A document could not be parsed; the message names the offending field.
class ParseError : public Error {
public:
  using Error::Error;
};

/// A value violates a domain invariant; the message names the field.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Filesystem read/write failure; the message carries the path.
class IoError : public Error {
public:
  using Error::Error;
};

/// Non-success HTTP status or transport failure.
class HttpError : public Error {
public:
  HttpError(int status, const std::string& message)
      : Error(message), status_(status) {}
  int status() const { return status_; }

private:
  int status_;
};

/// The requested repository does not exist or is not readable.
class UnknownRepoError : public HttpError {
public:
  explicit UnknownRepoError(const std::string& message)
      : HttpError(404, message) {}
};

/// Rate limit exhausted while running in fail-fast mode.
class RateLimitError : public HttpError {
public:
  explicit RateLimitError(const std::string& message)
      : HttpError(403, message) {}
};

/// Bad command line or configuration; maps to exit code 2.
class UsageError : public Error {
public:
  using Error::Error;
};

}  // namespace waste_radar
