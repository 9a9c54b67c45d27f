#pragma once

#include <stdexcept>
#include <string>

namespace dshock {

// Invalid law parameters, invalid k, or a model whose lethal probability is 0.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside an operation's domain (negative time, unsupported order).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Quadrature, transform or inversion failures.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InversionError : public NumericError {
 public:
  InversionError(const std::string& what, double achieved_error)
      : NumericError(what), achieved_error_(achieved_error) {}

  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

// A single simulated trajectory exceeded the gap cap before the k-th lethal shock.
class SimulationCapExceeded : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace dshock
