#pragma once

#include <stdexcept>
#include <string>

namespace drabi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the operation's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for this kind of object (e.g. pointwise J on a discrete bath).
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not reach the requested accuracy.
class NumericalAccuracyError : public Error {
 public:
  NumericalAccuracyError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Refused before allocation: the request exceeds a configured size budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class NoSolutionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint on disk does not belong to the run being resumed.
class ResumeMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace drabi
