#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qpc/core.hpp"
#include "qpc/ode.hpp"

namespace qpc {

/// Qubit density-matrix block conditioned on n electrons in the collector.
struct LadderBlock {
  double p1 = 0.0;                ///< sigma11^(n)
  double p2 = 0.0;                ///< sigma22^(n)
  std::complex<double> c{};       ///< sigma12^(n)
};

/// Blocks n = 0..n_max plus the probability that left the truncated ladder.
struct NumberLadder {
  std::vector<LadderBlock> blocks;
  double lost_mass = 0.0;

  std::size_t n_max() const noexcept { return blocks.empty() ? 0 : blocks.size() - 1; }
  /// Sum over n of (p1 + p2), excluding lost_mass.
  double total_mass() const noexcept;
  /// Sum over n of the blocks, i.e. the reduced qubit state.
  QubitState marginal() const noexcept;
};

struct LadderTrajectory {
  std::vector<double> times;
  std::vector<NumberLadder> ladders;
};

struct CountingDistribution {
  std::vector<double> probs;

  double total() const noexcept;
  double mean() const noexcept;
  /// Second raw moment sum n^2 P_n.
  double second_moment() const noexcept;
};

/// Largest lost_mass accepted from evolve_ladder.
inline constexpr double kMaxLostMass = 1e-9;

/// Integrates the number-resolved rate equations on n = 0..n_max, starting with
/// q0 entirely at n = 0. Gain out of n_max is accumulated in lost_mass; throws
/// TruncationTooSmall once it exceeds kMaxLostMass.
LadderTrajectory evolve_ladder(const SystemParams& p, const QubitState& q0,
                               std::span<const double> t_grid, std::size_t n_max,
                               const ode::Tolerances& tol = {});

CountingDistribution electron_distribution(const NumberLadder& ladder);

/// Exact P_n(t) through the counting field: every n -> n+1 gain term carries
/// e^{i chi}, the resulting 4x4 complex system is integrated at chi_k = 2 pi k / m
/// and P_n is recovered by an inverse DFT. Returns n = 0..m/2 - 1.
///
/// m must be a power of two. Throws AliasingRisk when m < 2 (choose_n_max + 1) or
/// when the recovered distribution has mass in its upper half or entries below
/// -1e-8.
CountingDistribution counting_field_distribution(const SystemParams& p, const QubitState& q0,
                                                 double t, std::size_t m,
                                                 const ode::Tolerances& tol = {});

/// ceil(D1 t + 10 sqrt(D1 t + 1) + 10), raised if needed until the Poisson(D1 t)
/// tail beyond it is below tail_eps. Requires 0 < tail_eps <= 1e-6.
std::size_t choose_n_max(const SystemParams& p, double t, double tail_eps = 1e-12);

/// Upper tail sum_{n > n_max} of Poisson(lambda).
double poisson_tail(double lambda, std::size_t n_max);

/// Smallest power of two >= 2 (n_max + 1).
std::size_t transform_size_for(std::size_t n_max);

}  // namespace qpc
