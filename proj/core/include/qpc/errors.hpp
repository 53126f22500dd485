#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qpc {

/// Base class for failures of a well-posed computation (integrator breakdown,
/// truncation leakage, aliasing). Input validation uses std::invalid_argument.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepSizeUnderflow : public NumericalError {
 public:
  StepSizeUnderflow(double time, double step);
  double time() const noexcept { return time_; }
  double step() const noexcept { return step_; }

 private:
  double time_;
  double step_;
};

/// Probability leaked past the top of the number ladder exceeded the budget.
class TruncationTooSmall : public NumericalError {
 public:
  TruncationTooSmall(double lost_mass, std::size_t n_max, std::size_t required_n_max);
  double lost_mass() const noexcept { return lost_mass_; }
  std::size_t required_n_max() const noexcept { return required_n_max_; }

 private:
  double lost_mass_;
  std::size_t required_n_max_;
};

class AliasingRisk : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Raised when an operation needs a tunnelling qubit (omega > 0).
class DegenerateQubit : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace qpc
