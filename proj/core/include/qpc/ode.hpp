#pragma once

// Dormand-Prince 5(4) integrator with max-norm local error control.
//
// A system is any type with
//
//   void derivative(std::span<const double> y, std::span<double> dydt, Window w) const;
//
// which fills dydt on [w.begin, w.end) and reads y only inside that range.
// Systems whose support moves through a large state (the number ladder) may
// also provide
//
//   WindowUpdate window(std::span<double> y);
//
// called before the first step and after every accepted step. It returns the
// range to evaluate next and may zero entries that it drops from the support.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "qpc/errors.hpp"

namespace qpc::ode {

struct Window {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct WindowUpdate {
  Window eval;
  bool modified_state = false;
};

struct Tolerances {
  double rtol = 1e-10;
  double atol = 1e-14;
};

struct Settings {
  Tolerances tol;
  /// <= 0 selects 1e-3 of the first output interval.
  double initial_step = 0.0;
  double max_step = std::numeric_limits<double>::infinity();
};

template <class S>
concept System = requires(const S& s, std::span<const double> y, std::span<double> dy, Window w) {
  s.derivative(y, dy, w);
};

template <class S>
concept WindowedSystem = System<S> && requires(S& s, std::span<double> y) {
  { s.window(y) } -> std::same_as<WindowUpdate>;
};

namespace detail {

// Butcher tableau of DOPRI5 (autonomous systems only, so the nodes are not
// needed); the seventh stage is first-same-as-last.
inline constexpr double kA[7][6] = {
    {},
    {1.0 / 5.0},
    {3.0 / 40.0, 9.0 / 40.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0},
};
// Difference between the fifth- and fourth-order weights.
inline constexpr std::array<double, 7> kE{71.0 / 57600.0,      0.0,          -71.0 / 16695.0,
                                          71.0 / 1920.0,       -17253.0 / 339200.0,
                                          22.0 / 525.0,        -1.0 / 40.0};

}  // namespace detail

/// Integrates from times[0] through every entry of `times`, calling
/// observe(index, t, y) at each of them (index 0 is the initial state). Steps
/// never straddle an output time. Throws StepSizeUnderflow when the controller
/// cannot meet the tolerance.
template <System Sys, class Observer>
void integrate(Sys& sys, std::span<double> y, std::span<const double> times, Observer&& observe,
               const Settings& settings = {}) {
  using detail::kA;
  using detail::kE;
  if (times.empty()) throw std::invalid_argument("integrate: empty time grid");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("integrate: time grid must be strictly increasing");
    }
  }

  const std::size_t n = y.size();
  std::array<std::vector<double>, 7> k;
  for (auto& stage : k) stage.assign(n, 0.0);
  std::vector<double> ytmp(y.begin(), y.end());
  std::vector<double> ynew(y.begin(), y.end());

  Window w{0, n};
  if constexpr (WindowedSystem<Sys>) w = sys.window(y).eval;

  double t = times[0];
  observe(std::size_t{0}, t, std::span<const double>(y));
  if (times.size() == 1) return;

  double h = settings.initial_step > 0.0 ? settings.initial_step : 1e-3 * (times[1] - times[0]);
  const double rtol = settings.tol.rtol;
  const double atol = settings.tol.atol;
  bool k1_valid = false;

  for (std::size_t out = 1; out < times.size(); ++out) {
    const double target = times[out];
    while (t < target) {
      double step = std::min(h, settings.max_step);
      bool clipped = false;
      if (t + step >= target || target - (t + step) <= 1e-12 * std::abs(target)) {
        step = target - t;
        clipped = true;
      }
      if (!(step > 1e-14 * std::max(1.0, std::abs(t)))) throw StepSizeUnderflow(t, step);

      if (!k1_valid) {
        sys.derivative(std::span<const double>(y), k[0], w);
        k1_valid = true;
      }
      for (std::size_t s = 1; s < 7; ++s) {
        for (std::size_t i = w.begin; i < w.end; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < s; ++j) acc += kA[s][j] * k[j][i];
          ytmp[i] = y[i] + step * acc;
        }
        sys.derivative(std::span<const double>(ytmp), k[s], w);
      }
      // Stage 7 input is the fifth-order solution.
      double err = 0.0;
      for (std::size_t i = w.begin; i < w.end; ++i) {
        ynew[i] = ytmp[i];
        double e = 0.0;
        for (std::size_t j = 0; j < 7; ++j) e += kE[j] * k[j][i];
        const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err = std::max(err, std::abs(step * e) / scale);
      }
      if (!std::isfinite(err)) throw StepSizeUnderflow(t, step);

      if (err <= 1.0) {
        t = clipped ? target : t + step;
        std::copy(ynew.begin() + static_cast<std::ptrdiff_t>(w.begin),
                  ynew.begin() + static_cast<std::ptrdiff_t>(w.end),
                  y.begin() + static_cast<std::ptrdiff_t>(w.begin));
        std::swap(k[0], k[6]);
        if constexpr (WindowedSystem<Sys>) {
          const WindowUpdate upd = sys.window(y);
          if (upd.modified_state || upd.eval.begin != w.begin || upd.eval.end != w.end) {
            k1_valid = false;
          }
          w = upd.eval;
        }
        const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = clipped ? std::max(h, step * grow) : step * grow;
      } else {
        h = step * std::max(0.2, 0.9 * std::pow(err, -0.2));
      }
    }
    observe(out, t, std::span<const double>(y));
  }
}

}  // namespace qpc::ode
