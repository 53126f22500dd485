#include "qpc/measurement_limit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qpc/moments.hpp"
#include "qpc/reduced_dynamics.hpp"

namespace qpc {

namespace {

void require_window(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("measurement window must be > 0 (shot noise diverges at 0)");
  }
}

double shot_sq(const SystemParams& p, const QubitState& q0, double dt, ShotNoiseModel mode,
               const ode::Tolerances& tol) {
  if (mode == ShotNoiseModel::asymptotic) return average_current(p, q0) / dt;
  const double s = current_dispersion(p, q0, dt, tol).exact;
  return s * s;
}

template <class F>
double golden_section(F&& f, double a, double b, double rel_width, double& f_at_min) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > rel_width * 0.5 * (a + b)) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc < fd) {
    f_at_min = fc;
    return c;
  }
  f_at_min = fd;
  return d;
}

void require_rates(double gamma, double omega) {
  if (gamma == 0.0) throw std::invalid_argument("closed-form limit is singular for Gamma_d = 0");
  if (omega == 0.0) throw std::invalid_argument("closed-form limit is singular for Omega = 0");
}

}  // namespace

double backaction_error(const SystemParams& p, const QubitState& q0, double dt,
                        const ode::Tolerances& tol) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw std::invalid_argument("window must be >= 0");
  if (dt == 0.0) return 0.0;
  const QubitState q = reduced_state_at(p, q0, dt, tol);
  return (p.d1() - p.d2()) * std::abs(q.sigma11 - q0.sigma11);
}

double total_error_sq(const SystemParams& p, const QubitState& q0, double dt,
                      ShotNoiseModel mode, const ode::Tolerances& tol) {
  require_window(dt);
  const double back = backaction_error(p, q0, dt, tol);
  return shot_sq(p, q0, dt, mode, tol) + back * back;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) {
    throw std::invalid_argument("log grid needs 0 < lo < hi and at least two points");
  }
  std::vector<double> g(n);
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

ErrorCurve sample_error_curve(const SystemParams& p, const QubitState& q0,
                              std::span<const double> dts, ShotNoiseModel mode,
                              const ode::Tolerances& tol) {
  if (dts.empty()) throw std::invalid_argument("error curve needs at least one window");
  std::vector<double> grid{0.0};
  for (double dt : dts) {
    require_window(dt);
    grid.push_back(dt);
  }
  const QubitTrajectory traj = evolve_reduced(p, q0, grid, tol);

  ErrorCurve curve;
  curve.dts.assign(dts.begin(), dts.end());
  const std::size_t n = dts.size();
  curve.shot.resize(n);
  curve.backaction.resize(n);
  curve.total_sq.resize(n);
  if (mode == ShotNoiseModel::exact) {
    const auto disp = current_dispersion(p, q0, dts, tol);
    for (std::size_t i = 0; i < n; ++i) curve.shot[i] = disp[i].exact;
  } else {
    const double current0 = average_current(p, q0);
    for (std::size_t i = 0; i < n; ++i) curve.shot[i] = std::sqrt(current0 / dts[i]);
  }
  const double delta_d = p.d1() - p.d2();
  for (std::size_t i = 0; i < n; ++i) {
    curve.backaction[i] = delta_d * std::abs(traj.states[i + 1].sigma11 - q0.sigma11);
    curve.total_sq[i] =
        curve.shot[i] * curve.shot[i] + curve.backaction[i] * curve.backaction[i];
  }
  const auto best = std::min_element(curve.total_sq.begin(), curve.total_sq.end());
  const auto k = static_cast<std::size_t>(best - curve.total_sq.begin());
  curve.argmin_dt = curve.dts[k];
  curve.min_total_sq = *best;
  curve.bracket_miss = n > 1 && (k == 0 || k == n - 1);
  return curve;
}

ErrorCurve optimize_measurement_time(const SystemParams& p, const QubitState& q0,
                                     Bracket bracket, ShotNoiseModel mode,
                                     const ode::Tolerances& tol) {
  if (p.omega() == 0.0) {
    throw DegenerateQubit("static qubit: error decreases monotonically, no finite optimum");
  }
  const std::vector<double> dts = log_grid(bracket.lo, bracket.hi, kScanPoints);
  ErrorCurve curve = sample_error_curve(p, q0, dts, mode, tol);

  const auto k = static_cast<std::size_t>(
      std::find(curve.dts.begin(), curve.dts.end(), curve.argmin_dt) - curve.dts.begin());
  const double a = dts[k == 0 ? 0 : k - 1];
  const double b = dts[std::min(k + 1, dts.size() - 1)];
  double refined_value = 0.0;
  const double refined = golden_section(
      [&](double dt) { return total_error_sq(p, q0, dt, mode, tol); }, a, b,
      kRefineRelativeWidth, refined_value);
  if (refined_value < curve.min_total_sq) {
    curve.argmin_dt = refined;
    curve.min_total_sq = refined_value;
  }
  return curve;
}

PrecisionLimit closed_form_weak(const SystemParams& p) {
  const DerivedRates r = derive_rates(p);
  const double omega = p.omega();
  require_rates(r.gamma_d, omega);
  PrecisionLimit lim{0.5 / omega * std::pow(2.0 * omega / r.gamma_d, 0.2),
                     2.5 * r.d_mean * omega * std::pow(r.gamma_d / (2.0 * omega), 0.2),
                     LimitRegime::weak_distortion, std::nullopt};
  const double distortion = r.gamma_d / (8.0 * omega);
  if (distortion > 0.1) {
    std::ostringstream os;
    os << "weak-distortion limit used outside its domain: Gamma_d/(8 Omega) = " << distortion
       << " > 0.1";
    lim.warning = os.str();
  }
  return lim;
}

PrecisionLimit closed_form_zeno(const SystemParams& p) {
  const DerivedRates r = derive_rates(p);
  const double omega = p.omega();
  require_rates(r.gamma_d, omega);
  PrecisionLimit lim{0.25 / omega * std::cbrt(r.gamma_d / (2.0 * omega)),
                     6.0 * r.d_mean * omega * std::cbrt(2.0 * omega / r.gamma_d),
                     LimitRegime::zeno, std::nullopt};
  const double distortion = r.gamma_d / (8.0 * omega);
  if (distortion < 10.0) {
    std::ostringstream os;
    os << "Zeno limit used outside its domain: Gamma_d/(8 Omega) = " << distortion << " < 10";
    lim.warning = os.str();
  }
  return lim;
}

Visibility single_run_visibility(const SystemParams& p) {
  const PrecisionLimit weak = closed_form_weak(p);
  const double delta_d = p.d1() - p.d2();
  return {weak.delta2_sq / (delta_d * delta_d), weak.warning};
}

std::string to_string(LimitRegime regime) {
  return regime == LimitRegime::zeno ? "zeno" : "weak-distortion";
}

std::string to_string(ShotNoiseModel mode) {
  return mode == ShotNoiseModel::exact ? "exact" : "asymptotic";
}

}  // namespace qpc
