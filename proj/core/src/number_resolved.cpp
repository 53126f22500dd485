#include "qpc/number_resolved.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"
#include "qpc/reduced_dynamics.hpp"

namespace qpc {

namespace {

constexpr std::size_t kBlock = 4;  // p1, p2, Re c, Im c
// Blocks whose entries all fall below this are removed from the active window.
constexpr double kDropThreshold = 1e-30;
// One DOPRI5 step moves support up by at most seven blocks.
constexpr std::size_t kPropagationMargin = 8;

// Dense ladder n = 0..n_max followed by an absorbing sink block that collects
// the gain out of n_max.
class LadderSystem {
 public:
  LadderSystem(const SystemParams& p, std::size_t n_max)
      : d1_(p.d1()),
        d2_(p.d2()),
        d_mean_(0.5 * (p.d1() + p.d2())),
        feed_(std::sqrt(p.d1() * p.d2())),
        omega_(p.omega()),
        eps_(p.epsilon()),
        n_max_(n_max) {}

  std::size_t size() const noexcept { return kBlock * (n_max_ + 2); }
  double dropped_mass() const noexcept { return dropped_; }

  void derivative(std::span<const double> y, std::span<double> dy, ode::Window w) const {
    const std::size_t b0 = w.begin / kBlock;
    const std::size_t b1 = w.end / kBlock;
    for (std::size_t b = b0; b < b1; ++b) {
      double* d = dy.data() + kBlock * b;
      const bool has_prev = b > b0;
      const double* prev = has_prev ? y.data() + kBlock * (b - 1) : nullptr;
      if (b == n_max_ + 1) {
        d[0] = has_prev ? d1_ * prev[0] : 0.0;
        d[1] = has_prev ? d2_ * prev[1] : 0.0;
        d[2] = 0.0;
        d[3] = 0.0;
        continue;
      }
      const double* cur = y.data() + kBlock * b;
      const double p1 = cur[0], p2 = cur[1], cr = cur[2], ci = cur[3];
      double g1 = 0.0, g2 = 0.0, gr = 0.0, gi = 0.0;
      if (has_prev) {
        g1 = d1_ * prev[0];
        g2 = d2_ * prev[1];
        gr = feed_ * prev[2];
        gi = feed_ * prev[3];
      }
      d[0] = -d1_ * p1 + g1 - 2.0 * omega_ * ci;
      d[1] = -d2_ * p2 + g2 + 2.0 * omega_ * ci;
      d[2] = -eps_ * ci - d_mean_ * cr + gr;
      d[3] = eps_ * cr + omega_ * (p1 - p2) - d_mean_ * ci + gi;
    }
  }

  ode::WindowUpdate window(std::span<double> y) {
    bool modified = false;
    auto negligible = [&](std::size_t b) {
      const double* v = y.data() + kBlock * b;
      return std::abs(v[0]) < kDropThreshold && std::abs(v[1]) < kDropThreshold &&
             std::abs(v[2]) < kDropThreshold && std::abs(v[3]) < kDropThreshold;
    };
    auto drop = [&](std::size_t b) {
      double* v = y.data() + kBlock * b;
      if (v[0] != 0.0 || v[1] != 0.0 || v[2] != 0.0 || v[3] != 0.0) {
        dropped_ += v[0] + v[1];
        std::fill(v, v + kBlock, 0.0);
        modified = true;
      }
    };
    while (lo_ < hi_ && negligible(lo_)) drop(lo_++);
    std::size_t top = std::min(hi_ + kPropagationMargin, n_max_ + 1);
    while (top > lo_ && negligible(top)) drop(top--);
    hi_ = top;
    const std::size_t end_block = std::min(hi_ + kPropagationMargin, n_max_ + 1) + 1;
    return {{kBlock * lo_, kBlock * end_block}, modified};
  }

 private:
  double d1_, d2_, d_mean_, feed_, omega_, eps_;
  std::size_t n_max_;
  std::size_t lo_ = 0;
  std::size_t hi_ = 0;
  double dropped_ = 0.0;
};

// Generating function of the ladder at counting field chi. State holds
// s11, s22, s12, s21 as (re, im) pairs.
struct CountingFieldSystem {
  std::complex<double> a1, a2, a12, a21;
  double omega;

  void derivative(std::span<const double> y, std::span<double> dy, ode::Window) const {
    const std::complex<double> s11{y[0], y[1]}, s22{y[2], y[3]}, s12{y[4], y[5]},
        s21{y[6], y[7]};
    const std::complex<double> i_omega{0.0, omega};
    const std::complex<double> flip = i_omega * (s12 - s21);
    const std::complex<double> pop = i_omega * (s11 - s22);
    const std::array<std::complex<double>, 4> d{a1 * s11 + flip, a2 * s22 - flip,
                                                a12 * s12 + pop, a21 * s21 - pop};
    for (std::size_t j = 0; j < 4; ++j) {
      dy[2 * j] = d[j].real();
      dy[2 * j + 1] = d[j].imag();
    }
  }
};

std::size_t required_n_max_estimate(const SystemParams& p, double t, std::size_t n_max) {
  const std::size_t rule = choose_n_max(p, t);
  return rule > n_max ? rule : 2 * n_max + 10;
}

}  // namespace

double NumberLadder::total_mass() const noexcept {
  double s = 0.0;
  for (const auto& b : blocks) s += b.p1 + b.p2;
  return s;
}

QubitState NumberLadder::marginal() const noexcept {
  QubitState q{0.0, {0.0, 0.0}};
  for (const auto& b : blocks) {
    q.sigma11 += b.p1;
    q.sigma12 += b.c;
  }
  return q;
}

double CountingDistribution::total() const noexcept {
  double s = 0.0;
  for (double v : probs) s += v;
  return s;
}

double CountingDistribution::mean() const noexcept {
  double s = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n) s += static_cast<double>(n) * probs[n];
  return s;
}

double CountingDistribution::second_moment() const noexcept {
  double s = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n) {
    const double x = static_cast<double>(n);
    s += x * x * probs[n];
  }
  return s;
}

LadderTrajectory evolve_ladder(const SystemParams& p, const QubitState& q0,
                               std::span<const double> t_grid, std::size_t n_max,
                               const ode::Tolerances& tol) {
  detail::check_time_grid(t_grid);
  if (!q0.is_physical()) throw std::invalid_argument("initial qubit state is not physical");

  LadderSystem sys(p, n_max);
  std::vector<double> y(sys.size(), 0.0);
  y[0] = q0.sigma11;
  y[1] = q0.sigma22();
  y[2] = q0.sigma12.real();
  y[3] = q0.sigma12.imag();

  LadderTrajectory traj;
  traj.times.assign(t_grid.begin(), t_grid.end());
  traj.ladders.resize(t_grid.size());
  const ode::Settings settings{tol, initial_step_hint(p)};
  ode::integrate(
      sys, std::span<double>(y), t_grid,
      [&](std::size_t i, double, std::span<const double> s) {
        NumberLadder& ladder = traj.ladders[i];
        ladder.blocks.resize(n_max + 1);
        for (std::size_t n = 0; n <= n_max; ++n) {
          const double* v = s.data() + kBlock * n;
          ladder.blocks[n] = {v[0], v[1], {v[2], v[3]}};
        }
        const double* sink = s.data() + kBlock * (n_max + 1);
        ladder.lost_mass = sink[0] + sink[1] + sys.dropped_mass();
        if (ladder.lost_mass > kMaxLostMass) {
          throw TruncationTooSmall(ladder.lost_mass, n_max,
                                   required_n_max_estimate(p, t_grid.back(), n_max));
        }
      },
      settings);
  return traj;
}

CountingDistribution electron_distribution(const NumberLadder& ladder) {
  CountingDistribution dist;
  dist.probs.reserve(ladder.blocks.size());
  for (const auto& b : ladder.blocks) dist.probs.push_back(b.p1 + b.p2);
  return dist;
}

CountingDistribution counting_field_distribution(const SystemParams& p, const QubitState& q0,
                                                 double t, std::size_t m,
                                                 const ode::Tolerances& tol) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("time must be >= 0");
  if (m < 2 || !std::has_single_bit(m)) {
    throw std::invalid_argument("transform size must be a power of two >= 2");
  }
  if (!q0.is_physical()) throw std::invalid_argument("initial qubit state is not physical");
  const std::size_t needed = 2 * (choose_n_max(p, t) + 1);
  if (m < needed) {
    std::ostringstream os;
    os << "aliasing risk: transform size " << m << " below " << needed;
    throw AliasingRisk(os.str());
  }

  const double d_mean = 0.5 * (p.d1() + p.d2());
  const double feed = std::sqrt(p.d1() * p.d2());
  const double two_pi = 2.0 * std::numbers::pi;
  const std::size_t half = m / 2;

  // Z_k = s11 + s22 at chi_k for k = 0..m/2; the rest follow by conjugation.
  std::vector<std::complex<double>> z(half + 1);
  const std::array<double, 2> grid{0.0, t};
  const ode::Settings settings{tol, initial_step_hint(p)};
  detail::parallel_for(half + 1, [&](std::size_t k) {
    const double chi = two_pi * static_cast<double>(k) / static_cast<double>(m);
    const std::complex<double> phase = std::polar(1.0, chi);
    CountingFieldSystem sys{p.d1() * (phase - 1.0), p.d2() * (phase - 1.0),
                            std::complex<double>{-d_mean, p.epsilon()} + feed * phase,
                            std::complex<double>{-d_mean, -p.epsilon()} + feed * phase,
                            p.omega()};
    std::array<double, 8> y{q0.sigma11,         0.0, q0.sigma22(),        0.0,
                            q0.sigma12.real(),  q0.sigma12.imag(),
                            q0.sigma12.real(), -q0.sigma12.imag()};
    if (t > 0.0) {
      ode::integrate(sys, std::span<double>(y), grid,
                     [](std::size_t, double, std::span<const double>) {}, settings);
    }
    z[k] = {y[0] + y[2], y[1] + y[3]};
  });

  std::vector<double> cos_table(m), sin_table(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double a = two_pi * static_cast<double>(j) / static_cast<double>(m);
    cos_table[j] = std::cos(a);
    sin_table[j] = std::sin(a);
  }
  std::vector<double> probs(m);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t n = 0; n < m; ++n) {
    // Re(Z_k e^{-i n chi_k}) summed over both conjugate halves.
    double acc = z[0].real() + ((n % 2 == 0) ? z[half].real() : -z[half].real());
    for (std::size_t k = 1; k < half; ++k) {
      const std::size_t j = (n * k) % m;
      acc += 2.0 * (z[k].real() * cos_table[j] + z[k].imag() * sin_table[j]);
    }
    probs[n] = acc * inv_m;
  }

  double upper_mass = 0.0;
  for (std::size_t n = half; n < m; ++n) upper_mass += probs[n];
  const double most_negative = *std::min_element(probs.begin(), probs.end());
  if (upper_mass > 1e-8 || most_negative < -1e-8) {
    std::ostringstream os;
    os << "aliasing risk: mass " << upper_mass << " in the upper half of the transform, minimum "
       << most_negative;
    throw AliasingRisk(os.str());
  }
  probs.resize(half);
  return {std::move(probs)};
}

double poisson_tail(double lambda, std::size_t n_max) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("poisson_tail: lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  const double log_lambda = std::log(lambda);
  double sum = 0.0;
  for (std::size_t n = n_max + 1;; ++n) {
    const double x = static_cast<double>(n);
    const double term = std::exp(-lambda + x * log_lambda - std::lgamma(x + 1.0));
    sum += term;
    if (x > lambda && term <= 1e-17 * sum) break;
  }
  return sum;
}

std::size_t choose_n_max(const SystemParams& p, double t, double tail_eps) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("time must be >= 0");
  if (!(tail_eps > 0.0 && tail_eps <= 1e-6)) {
    throw std::invalid_argument("tail_eps must lie in (0, 1e-6]");
  }
  const double lambda = p.d1() * t;
  auto n = static_cast<std::size_t>(std::ceil(lambda + 10.0 * std::sqrt(lambda + 1.0) + 10.0));
  while (poisson_tail(lambda, n) >= tail_eps) ++n;
  return n;
}

std::size_t transform_size_for(std::size_t n_max) {
  return std::bit_ceil(2 * (n_max + 1));
}

}  // namespace qpc
