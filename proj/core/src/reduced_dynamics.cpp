#include "qpc/reduced_dynamics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace qpc {

namespace detail {

void check_time_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("time grid is empty");
  if (t_grid.front() != 0.0) throw std::invalid_argument("time grid must start at t = 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!std::isfinite(t_grid[i]) || !(t_grid[i] > t_grid[i - 1])) {
      throw std::invalid_argument("time grid must be finite and strictly increasing");
    }
  }
}

}  // namespace detail

namespace {

// State: sigma11, Re sigma12, Im sigma12.
struct ReducedSystem {
  double omega;
  double eps;
  double half_gamma;

  void derivative(std::span<const double> y, std::span<double> dy, ode::Window) const {
    const double s11 = y[0], re = y[1], im = y[2];
    dy[0] = -2.0 * omega * im;
    dy[1] = -eps * im - half_gamma * re;
    dy[2] = eps * re + omega * (2.0 * s11 - 1.0) - half_gamma * im;
  }
};

}  // namespace

QubitTrajectory evolve_reduced(const SystemParams& p, const QubitState& q0,
                               std::span<const double> t_grid, const ode::Tolerances& tol) {
  detail::check_time_grid(t_grid);
  if (!q0.is_physical()) throw std::invalid_argument("initial qubit state is not physical");

  ReducedSystem sys{p.omega(), p.epsilon(), 0.5 * derive_rates(p).gamma_d};
  std::array<double, 3> y{q0.sigma11, q0.sigma12.real(), q0.sigma12.imag()};

  QubitTrajectory traj;
  traj.times.assign(t_grid.begin(), t_grid.end());
  traj.states.resize(t_grid.size());
  ode::Settings settings{tol, initial_step_hint(p)};
  ode::integrate(
      sys, std::span<double>(y), t_grid,
      [&](std::size_t i, double, std::span<const double> s) {
        traj.states[i] = QubitState{s[0], {s[1], s[2]}};
      },
      settings);
  return traj;
}

QubitState reduced_state_at(const SystemParams& p, const QubitState& q0, double t,
                            const ode::Tolerances& tol) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be >= 0");
  if (t == 0.0) return q0;
  const std::array<double, 2> grid{0.0, t};
  return evolve_reduced(p, q0, grid, tol).states.back();
}

double sigma11_aligned_closed(const SystemParams& p, double t) {
  if (p.epsilon() != 0.0) {
    throw std::invalid_argument("closed form holds only for aligned levels (epsilon = 0)");
  }
  if (p.omega() == 0.0) return 1.0;
  const double gamma = derive_rates(p).gamma_d;
  const double decay = 0.25 * gamma;
  const RabiFrequency rabi = rabi_frequency(p);
  double z = 0.0;  // sigma11 - sigma22
  switch (rabi.regime) {
    case Damping::underdamped: {
      const double w = rabi.rate;
      z = std::exp(-decay * t) * (std::cos(w * t) + decay / w * std::sin(w * t));
      break;
    }
    case Damping::critical:
      z = std::exp(-decay * t) * (1.0 + decay * t);
      break;
    case Damping::overdamped: {
      // e^{-a t}(cosh kt + (a/k) sinh kt) written with decaying exponentials only.
      const double k = rabi.rate;
      const double slow = std::exp((k - decay) * t);
      const double fast = std::exp(-(k + decay) * t);
      z = 0.5 * (slow + fast) + 0.5 * decay / k * (slow - fast);
      break;
    }
  }
  return 0.5 * (1.0 + z);
}

double zeno_sigma11(const SystemParams& p, double t) {
  const double gamma = derive_rates(p).gamma_d;
  if (gamma == 0.0) throw std::invalid_argument("Zeno formula needs Gamma_d > 0");
  return 0.5 * (1.0 + std::exp(-8.0 * p.omega() * p.omega() * t / gamma));
}

double average_current(const SystemParams& p, const QubitState& q) noexcept {
  return p.d2() + (p.d1() - p.d2()) * q.sigma11;
}

}  // namespace qpc
