#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gapfit {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mathematically undefined input, e.g. division by zero or log of a
// nonpositive value.
class DomainError : public Error {
 public:
  using Error::Error;
};

// API misuse or an invalid configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Not enough reported values to score or fit a series.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// A function evaluated on the tape produced a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}

  // Index of the first tape node whose value was not finite.
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gapfit
