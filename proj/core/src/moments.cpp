#include "qpc/moments.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qpc/reduced_dynamics.hpp"

namespace qpc {

namespace {

// State layout:
//   0..2   sigma11, Re sigma12, Im sigma12
//   3..6   n11, n22, Re n12, Im n12          (first moments)
//   7..10  N11, N22, Re N12, Im N12          (second moments)
struct MomentSystem {
  double d1, d2, feed, half_gamma, omega, eps;

  void derivative(std::span<const double> y, std::span<double> dy, ode::Window) const {
    const double s11 = y[0], sr = y[1], si = y[2];
    const double s22 = 1.0 - s11;
    dy[0] = -2.0 * omega * si;
    dy[1] = -eps * si - half_gamma * sr;
    dy[2] = eps * sr + omega * (2.0 * s11 - 1.0) - half_gamma * si;

    const double a11 = y[3], a22 = y[4], ar = y[5], ai = y[6];
    dy[3] = d1 * s11 - 2.0 * omega * ai;
    dy[4] = d2 * s22 + 2.0 * omega * ai;
    dy[5] = -eps * ai - half_gamma * ar + feed * sr;
    dy[6] = eps * ar + omega * (a11 - a22) - half_gamma * ai + feed * si;

    const double b11 = y[7], b22 = y[8], br = y[9], bi = y[10];
    dy[7] = 2.0 * d1 * a11 + d1 * s11 - 2.0 * omega * bi;
    dy[8] = 2.0 * d2 * a22 + d2 * s22 + 2.0 * omega * bi;
    dy[9] = -eps * bi - half_gamma * br + feed * (2.0 * ar + sr);
    dy[10] = eps * br + omega * (b11 - b22) - half_gamma * bi + feed * (2.0 * ai + si);
  }
};

MomentState unpack(std::span<const double> y) {
  MomentState m;
  m.q = QubitState{y[0], {y[1], y[2]}};
  m.m1_11 = y[3];
  m.m1_22 = y[4];
  m.m1_12 = {y[5], y[6]};
  m.m2_11 = y[7];
  m.m2_22 = y[8];
  m.m2_12 = {y[9], y[10]};
  return m;
}

}  // namespace

MomentTrajectory evolve_moments(const SystemParams& p, const QubitState& q0,
                                std::span<const double> t_grid, const ode::Tolerances& tol) {
  detail::check_time_grid(t_grid);
  if (!q0.is_physical()) throw std::invalid_argument("initial qubit state is not physical");

  MomentSystem sys{p.d1(),    p.d2(),      std::sqrt(p.d1() * p.d2()),
                   0.5 * derive_rates(p).gamma_d, p.omega(), p.epsilon()};
  std::array<double, 11> y{};
  y[0] = q0.sigma11;
  y[1] = q0.sigma12.real();
  y[2] = q0.sigma12.imag();

  MomentTrajectory traj;
  traj.times.assign(t_grid.begin(), t_grid.end());
  traj.states.resize(t_grid.size());
  const ode::Settings settings{tol, initial_step_hint(p)};
  ode::integrate(
      sys, std::span<double>(y), t_grid,
      [&](std::size_t i, double, std::span<const double> s) { traj.states[i] = unpack(s); },
      settings);
  return traj;
}

ChargeStatistics mean_and_variance(const MomentState& m) {
  const double mean = m.m1_11 + m.m1_22;
  const double variance = (m.m2_11 + m.m2_22) - mean * mean;
  if (variance < -1e-9) {
    std::ostringstream os;
    os << "negative charge variance " << variance << ": moment integration is inconsistent";
    throw NumericalError(os.str());
  }
  return {mean, variance};
}

std::vector<CurrentDispersion> current_dispersion(const SystemParams& p, const QubitState& q0,
                                                  std::span<const double> dts,
                                                  const ode::Tolerances& tol) {
  std::vector<double> grid{0.0};
  for (double dt : dts) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw std::invalid_argument("measurement window must be > 0 (dispersion diverges at 0)");
    }
    grid.push_back(dt);
  }
  const MomentTrajectory traj = evolve_moments(p, q0, grid, tol);
  const double current0 = average_current(p, q0);

  std::vector<CurrentDispersion> out;
  out.reserve(dts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double dt = dts[i];
    const ChargeStatistics stats = mean_and_variance(traj.states[i + 1]);
    out.push_back({std::sqrt(std::max(stats.variance, 0.0)) / dt, std::sqrt(current0 / dt)});
  }
  return out;
}

CurrentDispersion current_dispersion(const SystemParams& p, const QubitState& q0, double dt,
                                     const ode::Tolerances& tol) {
  const std::array<double, 1> one{dt};
  return current_dispersion(p, q0, std::span<const double>(one), tol).front();
}

}  // namespace qpc
