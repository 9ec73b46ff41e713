#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nmfmm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands whose dimensions do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A precondition on values (not shapes) was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A column (or factor component) is identically zero where a nonzero one is required.
class DegenerateError : public Error {
 public:
  DegenerateError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// A multiplicative map met a zero denominator; the positivity floor is misconfigured.
class PositivityError : public Error {
 public:
  using Error::Error;
};

/// Objective became non-finite, or a loop that must terminate did not.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, long iteration)
      : Error(what), iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

/// Malformed CSV input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace nmfmm
