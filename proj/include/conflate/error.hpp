#pragma once

#include <stdexcept>
#include <string>

namespace conflate {

// Base of every error the library raises. The CLI maps ValidationError and
// its relatives to exit code 1 and BackendError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Geometry outside the local-projection extent (> 1 degree, polar, antimeridian).
class ExtentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BackendError : public Error {
 public:
  BackendError(const std::string& what, int last_status = 0)
      : Error(what), last_status_(last_status) {}

  int last_status() const noexcept { return last_status_; }

 private:
  int last_status_;
};

class CredentialError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace conflate
