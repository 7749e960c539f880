#pragma once

#include <stdexcept>
#include <string>

namespace hotspot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coefficient returned a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, double xi)
      : Error(what + " (xi = " + std::to_string(xi) + ")"), xi_(xi) {}
  double xi() const noexcept { return xi_; }

 private:
  double xi_;
};

class DivergentIntegral : public Error {
 public:
  using Error::Error;
};

class NonpositiveCoefficient : public Error {
 public:
  using Error::Error;
};

class LinearSolveFailure : public Error {
 public:
  using Error::Error;
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

class InfiniteLambda : public Error {
 public:
  InfiniteLambda() : Error("sup |f|^2/gamma is infinite") {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace hotspot
