#pragma once

#include <stdexcept>
#include <string>

namespace systolic3d {

// All simulator failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class FloorplanError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class UndefinedPowerError : public Error {
 public:
  using Error::Error;
};

}  // namespace systolic3d
