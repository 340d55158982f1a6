#pragma once

#include <stdexcept>
#include <string>

namespace fermigas {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs that violate a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Solver breakdown: bracket failure, no convergence, mass jump.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Desk-scale limits (basis size, enumeration, transport support).
class CapError : public Error {
 public:
  using Error::Error;
};

class MassJumpError : public NumericError {
 public:
  MassJumpError(double gap, double lambda_lo, double lambda_hi);
  double gap() const noexcept { return gap_; }
  double lambda_lo() const noexcept { return lambda_lo_; }
  double lambda_hi() const noexcept { return lambda_hi_; }

 private:
  double gap_, lambda_lo_, lambda_hi_;
};

}  // namespace fermigas
