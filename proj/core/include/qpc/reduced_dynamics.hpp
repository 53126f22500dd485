#pragma once

#include <span>
#include <vector>

#include "qpc/core.hpp"
#include "qpc/ode.hpp"

namespace qpc {

struct QubitTrajectory {
  std::vector<double> times;
  std::vector<QubitState> states;
};

/// Reduced qubit dynamics with detector-induced dephasing:
///   d sigma11/dt = i Omega (sigma12 - sigma21)
///   d sigma12/dt = i eps sigma12 + i Omega (2 sigma11 - 1) - (Gamma_d / 2) sigma12
///
/// t_grid must start at 0 and be strictly increasing.
QubitTrajectory evolve_reduced(const SystemParams& p, const QubitState& q0,
                               std::span<const double> t_grid, const ode::Tolerances& tol = {});

/// Convenience: state at a single time t >= 0.
QubitState reduced_state_at(const SystemParams& p, const QubitState& q0, double t,
                            const ode::Tolerances& tol = {});

/// sigma11(t) = [1 + e^{-Gamma_d t/4} (cos wt + eta sin wt)] / 2, eta = Gamma_d / 4w, for
/// aligned levels and the electron starting in dot 1. Continues to cosh/sinh past
/// the critical point. Throws std::invalid_argument when eps != 0.
double sigma11_aligned_closed(const SystemParams& p, double t);

/// Strong-measurement localisation [1 + exp(-8 Omega^2 t / Gamma_d)] / 2.
/// Throws std::invalid_argument when Gamma_d == 0.
double zeno_sigma11(const SystemParams& p, double t);

/// Detector current D2 + (D1 - D2) sigma11.
double average_current(const SystemParams& p, const QubitState& q) noexcept;

namespace detail {

/// Shared by the integrators that need a checked [0, ...] grid.
void check_time_grid(std::span<const double> t_grid);

}  // namespace detail

}  // namespace qpc
