#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpc/core.hpp"
#include "qpc/ode.hpp"

namespace qpc {

/// How the shot-noise part of the total error is evaluated.
enum class ShotNoiseModel {
  asymptotic,  ///< I(0) / dt, the small-window form
  exact,       ///< var(dt) / dt^2 from the moment hierarchy
};

/// Back-action error dD |sigma11(dt) - sigma11(0)|: the bias in the inferred
/// current caused by the qubit moving during the window.
double backaction_error(const SystemParams& p, const QubitState& q0, double dt,
                        const ode::Tolerances& tol = {});

/// shot^2 + backaction^2. Throws std::invalid_argument for dt <= 0.
double total_error_sq(const SystemParams& p, const QubitState& q0, double dt,
                      ShotNoiseModel mode = ShotNoiseModel::asymptotic,
                      const ode::Tolerances& tol = {});

struct ErrorCurve {
  std::vector<double> dts;
  std::vector<double> shot;
  std::vector<double> backaction;
  std::vector<double> total_sq;
  double argmin_dt = 0.0;
  double min_total_sq = 0.0;
  /// The best sample sits on either end of the bracket.
  bool bracket_miss = false;
};

/// Evaluates the error terms on an increasing list of windows; the optimum
/// fields are the best sample.
ErrorCurve sample_error_curve(const SystemParams& p, const QubitState& q0,
                              std::span<const double> dts,
                              ShotNoiseModel mode = ShotNoiseModel::asymptotic,
                              const ode::Tolerances& tol = {});

/// n points log-spaced over [lo, hi], both ends included.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct Bracket {
  double lo;
  double hi;
};

inline constexpr std::size_t kScanPoints = 200;
inline constexpr double kRefineRelativeWidth = 1e-4;

/// Log scan of kScanPoints windows followed by golden-section refinement around
/// the best one. Throws DegenerateQubit for omega == 0 (the error then falls
/// monotonically and has no finite optimum). A best scan point on the bracket
/// edge sets bracket_miss.
ErrorCurve optimize_measurement_time(const SystemParams& p, const QubitState& q0,
                                     Bracket bracket,
                                     ShotNoiseModel mode = ShotNoiseModel::asymptotic,
                                     const ode::Tolerances& tol = {});

enum class LimitRegime { weak_distortion, zeno };

struct PrecisionLimit {
  double dt_star;
  double delta2_sq;
  LimitRegime regime;
  /// Set when the parameters sit outside the formula's validity domain.
  std::optional<std::string> warning;
};

/// Weak qubit distortion (Gamma_d / 8 << Omega):
///   dt* = (1/2 Omega)(2 Omega / Gamma_d)^{1/5},  delta2^2 = (5 D Omega / 2)(Gamma_d / 2 Omega)^{1/5}.
/// Warns when Gamma_d / 8 Omega > 0.1; throws std::invalid_argument if Gamma_d or Omega is 0.
PrecisionLimit closed_form_weak(const SystemParams& p);

/// Strong measurement (Gamma_d / 8 >> Omega):
///   dt* = (1/4 Omega)(Gamma_d / 2 Omega)^{1/3},  delta2^2 = 6 D Omega (2 Omega / Gamma_d)^{1/3}.
/// Warns when Gamma_d / 8 Omega < 10; throws std::invalid_argument if Gamma_d or Omega is 0.
PrecisionLimit closed_form_zeno(const SystemParams& p);

struct Visibility {
  /// delta2^2 / dD^2 from the weak-distortion limit. Rabi oscillations are
  /// resolvable in a single run only when this is << 1 (roughly Omega << 2 Gamma_d).
  double ratio;
  std::optional<std::string> warning;
};

Visibility single_run_visibility(const SystemParams& p);

std::string to_string(LimitRegime regime);
std::string to_string(ShotNoiseModel mode);

}  // namespace qpc
