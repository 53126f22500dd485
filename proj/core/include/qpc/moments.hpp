#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qpc/core.hpp"
#include "qpc/ode.hpp"

namespace qpc {

/// n- and n^2-weighted sums of the number-resolved blocks, carried alongside
/// the reduced state they are driven by.
struct MomentState {
  QubitState q;
  double m1_11 = 0.0;
  double m1_22 = 0.0;
  std::complex<double> m1_12{};
  double m2_11 = 0.0;
  double m2_22 = 0.0;
  std::complex<double> m2_12{};
};

struct MomentTrajectory {
  std::vector<double> times;
  std::vector<MomentState> states;
};

/// Integrates the closed first/second moment hierarchy with all charge at
/// n = 0 initially.
MomentTrajectory evolve_moments(const SystemParams& p, const QubitState& q0,
                                std::span<const double> t_grid, const ode::Tolerances& tol = {});

struct ChargeStatistics {
  double mean;
  double variance;
};

/// Throws NumericalError when the variance is below -1e-9.
ChargeStatistics mean_and_variance(const MomentState& m);

struct CurrentDispersion {
  double exact;       ///< sqrt(var(dt)) / dt from the moment hierarchy
  double asymptotic;  ///< sqrt(I(0) / dt), I(0) = D2 + dD sigma11(0)
};

/// Current dispersion over a window dt that starts with zero collected charge.
/// Throws std::invalid_argument for dt <= 0.
CurrentDispersion current_dispersion(const SystemParams& p, const QubitState& q0, double dt,
                                     const ode::Tolerances& tol = {});

/// Same for an increasing list of windows, sharing one integration.
std::vector<CurrentDispersion> current_dispersion(const SystemParams& p, const QubitState& q0,
                                                  std::span<const double> dts,
                                                  const ode::Tolerances& tol = {});

}  // namespace qpc
