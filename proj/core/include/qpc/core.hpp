#pragma once

#include <complex>

#include "qpc/errors.hpp"

namespace qpc {

/// Qubit and detector constants, hbar = e = 1.
///
/// The detector passes current D1 when dot 1 (far from the point contact) is
/// occupied and D2 <= D1 when dot 2 is occupied. Construction rejects negative
/// or non-finite values and D2 > D1.
class SystemParams {
 public:
  SystemParams(double omega, double epsilon, double d1, double d2);

  /// Picks D1, D2 so that (sqrt(D1) - sqrt(D2))^2 = gamma_d and
  /// (D1 + D2) / 2 = d_mean. Requires 0 <= gamma_d <= 2 d_mean.
  static SystemParams from_decoherence(double omega, double epsilon, double gamma_d,
                                       double d_mean);

  double omega() const noexcept { return omega_; }
  /// Level detuning E2 - E1.
  double epsilon() const noexcept { return epsilon_; }
  double d1() const noexcept { return d1_; }
  double d2() const noexcept { return d2_; }

 private:
  double omega_;
  double epsilon_;
  double d1_;
  double d2_;
};

struct DerivedRates {
  double gamma_d;  ///< decoherence rate (sqrt(D1) - sqrt(D2))^2
  double delta_d;  ///< signal D1 - D2
  double d_mean;   ///< (D1 + D2) / 2
};

DerivedRates derive_rates(const SystemParams& p) noexcept;

/// Reduced 2x2 density matrix; sigma22 = 1 - sigma11, sigma21 = conj(sigma12).
struct QubitState {
  double sigma11 = 1.0;
  std::complex<double> sigma12{0.0, 0.0};

  /// Validating factory: 0 <= sigma11 <= 1 and |sigma12|^2 <= sigma11 sigma22 + 1e-9.
  static QubitState make(double sigma11, std::complex<double> sigma12 = {});
  /// Electron localised in dot 1.
  static QubitState dot1() noexcept { return {}; }

  double sigma22() const noexcept { return 1.0 - sigma11; }
  bool is_physical(double tol = 1e-9) const noexcept;
};

struct DetectorRates {
  double d1;
  double d2;
};

/// D = (2 pi)^2 |amplitude|^2 rho_L rho_R V for the unperturbed and the
/// perturbed point-contact amplitude.
DetectorRates rates_from_microscopic(double omega_bar, double omega_bar_prime, double rho_l,
                                     double rho_r, double bias);

enum class Damping { underdamped, critical, overdamped };

struct RabiFrequency {
  Damping regime;
  /// omega for underdamped, kappa (hyperbolic continuation) for overdamped,
  /// zero at the critical point.
  double rate;
};

/// Throws DegenerateQubit for omega == 0.
RabiFrequency rabi_frequency(const SystemParams& p);

/// Initial integration step min(1/(20 Omega), 1/(20|eps|), 1/(20 Gamma_d), 1/(20 D1))
/// over the nonzero scales.
double initial_step_hint(const SystemParams& p) noexcept;

}  // namespace qpc
