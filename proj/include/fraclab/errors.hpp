#pragma once

#include <stdexcept>
#include <string>

namespace fraclab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition on the inputs does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A geometric margin (kappa, mollifier radius) is violated.
class MarginError : public Error {
 public:
  using Error::Error;
};

/// Exponent separation hypothesis violated without override.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// Evaluation too close to a pole of a meromorphic function.
class PoleError : public Error {
 public:
  using Error::Error;
};

/// A field or sphere does not fit in the computational box.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Interior operator is numerically singular.
class EigenvalueConditionError : public Error {
 public:
  using Error::Error;
};

/// Quadrature could not reach its target tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// Iterative extrapolation failed to settle.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration text.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace fraclab
