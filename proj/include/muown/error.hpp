#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace muown {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class NonFinite : public Error {
public:
  using Error::Error;
};

class ConvergenceError : public Error {
public:
  using Error::Error;
};

// A row whose Euclidean norm is at or below the rejection threshold.
class ZeroRow : public Error {
public:
  explicit ZeroRow(std::size_t row)
      : Error("row " + std::to_string(row) + " has (near-)zero norm"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Configuration problems; `field` names the offending key (dotted path).
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string &what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

class SerializationError : public Error {
public:
  using Error::Error;
};

// Failures collected while stepping a list of layers.
class StepError : public Error {
public:
  struct Failure {
    std::size_t layer;
    std::string message;
  };

  explicit StepError(std::vector<Failure> failures);
  const std::vector<Failure> &failures() const noexcept { return failures_; }

private:
  std::vector<Failure> failures_;
};

} // namespace muown
