#include "qpc/errors.hpp"

#include <sstream>

namespace qpc {

namespace {

std::string underflow_message(double time, double step) {
  std::ostringstream os;
  os << "step-size underflow at t = " << time << " (h = " << step
     << "): requested accuracy is unreachable";
  return os.str();
}

std::string truncation_message(double lost, std::size_t n_max, std::size_t required) {
  std::ostringstream os;
  os << "truncation too small: lost mass " << lost << " exceeds 1e-9 with n_max = " << n_max
     << "; estimated required n_max = " << required;
  return os.str();
}

}  // namespace

StepSizeUnderflow::StepSizeUnderflow(double time, double step)
    : NumericalError(underflow_message(time, step)), time_(time), step_(step) {}

TruncationTooSmall::TruncationTooSmall(double lost_mass, std::size_t n_max,
                                       std::size_t required_n_max)
    : NumericalError(truncation_message(lost_mass, n_max, required_n_max)),
      lost_mass_(lost_mass),
      required_n_max_(required_n_max) {}

}  // namespace qpc
