#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ldpnb {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// An argument is outside its documented range (bad epsilon, bad domain size,
// value out of [-1, 1], dimension mismatch, ...).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A collection that must be non-empty was empty.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// Reports passed to an aggregator disagree in shape or kind.
class InconsistentReportsError : public Error {
 public:
  using Error::Error;
};

// A record does not match the dataset schema it is used with.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Input could not be parsed. Carries the offending line number when the
// source is line-oriented; line() is 0 otherwise.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A run configuration field is missing or invalid; message names the field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File system failure (missing file, unreadable path, write failure).
class IoError : public Error {
 public:
  using Error::Error;
};

// Data is unusable for the requested operation: constant column where
// variation is required, a single class where several are needed, a
// non-positive prior, zero-variance input to a projection fit.
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace ldpnb
