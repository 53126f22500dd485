#include "qpc/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qpc {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

SystemParams::SystemParams(double omega, double epsilon, double d1, double d2)
    : omega_(omega), epsilon_(epsilon), d1_(d1), d2_(d2) {
  require(std::isfinite(omega) && std::isfinite(epsilon) && std::isfinite(d1) &&
              std::isfinite(d2),
          "system parameters must be finite");
  require(omega >= 0.0, "omega must be >= 0");
  require(d1 > 0.0, "d1 must be > 0");
  require(d2 >= 0.0, "d2 must be >= 0");
  require(d1 >= d2, "d1 must be >= d2 (dot 2 sits next to the point contact, so I2 <= I1)");
}

SystemParams SystemParams::from_decoherence(double omega, double epsilon, double gamma_d,
                                            double d_mean) {
  require(gamma_d >= 0.0 && d_mean > 0.0, "need gamma_d >= 0 and d_mean > 0");
  require(gamma_d <= 2.0 * d_mean, "gamma_d cannot exceed 2 d_mean");
  const double g = std::sqrt(gamma_d);
  const double b = 0.5 * (std::sqrt(4.0 * d_mean - gamma_d) - g);
  const double a = b + g;
  return {omega, epsilon, a * a, b * b};
}

DerivedRates derive_rates(const SystemParams& p) noexcept {
  const double s = std::sqrt(p.d1()) - std::sqrt(p.d2());
  return {s * s, p.d1() - p.d2(), 0.5 * (p.d1() + p.d2())};
}

QubitState QubitState::make(double sigma11, std::complex<double> sigma12) {
  QubitState q{sigma11, sigma12};
  require(std::isfinite(sigma11) && std::isfinite(sigma12.real()) &&
              std::isfinite(sigma12.imag()),
          "qubit state must be finite");
  require(sigma11 >= 0.0 && sigma11 <= 1.0, "sigma11 must lie in [0, 1]");
  require(q.is_physical(), "|sigma12|^2 exceeds sigma11 * sigma22 (state not positive)");
  return q;
}

bool QubitState::is_physical(double tol) const noexcept {
  return sigma11 >= -tol && sigma11 <= 1.0 + tol &&
         std::norm(sigma12) <= sigma11 * sigma22() + tol;
}

DetectorRates rates_from_microscopic(double omega_bar, double omega_bar_prime, double rho_l,
                                     double rho_r, double bias) {
  require(omega_bar >= 0.0 && omega_bar_prime >= 0.0 && rho_l >= 0.0 && rho_r >= 0.0 &&
              bias >= 0.0,
          "microscopic inputs must be >= 0");
  constexpr double four_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
  const double scale = four_pi_sq * rho_l * rho_r * bias;
  return {scale * omega_bar * omega_bar, scale * omega_bar_prime * omega_bar_prime};
}

RabiFrequency rabi_frequency(const SystemParams& p) {
  if (p.omega() == 0.0) throw DegenerateQubit("omega = 0: the qubit does not oscillate");
  const double x = derive_rates(p).gamma_d / (8.0 * p.omega());
  if (x == 1.0) return {Damping::critical, 0.0};
  const double rate = 2.0 * p.omega() * std::sqrt(std::abs(1.0 - x * x));
  return {x < 1.0 ? Damping::underdamped : Damping::overdamped, rate};
}

double initial_step_hint(const SystemParams& p) noexcept {
  double h = 1.0 / (20.0 * p.d1());
  for (double scale : {p.omega(), std::abs(p.epsilon()), derive_rates(p).gamma_d}) {
    if (scale > 0.0) h = std::min(h, 1.0 / (20.0 * scale));
  }
  return h;
}

}  // namespace qpc
