#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qpc/moments.hpp"
#include "qpc/number_resolved.hpp"
#include "qpc/reduced_dynamics.hpp"
#include "support/random_suite.hpp"

namespace qpc {
namespace {

using qpc::testing::linear_grid;

double poisson(double lambda, std::size_t n) {
  return std::exp(-lambda + static_cast<double>(n) * std::log(lambda) -
                  std::lgamma(static_cast<double>(n) + 1.0));
}

TEST(Ladder, PoissonLimit) {
  const SystemParams p(0.0, 0.0, 1.0, 0.5);
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto traj = evolve_ladder(p, QubitState::dot1(), grid, 40);
  const auto dist = electron_distribution(traj.ladders.back());
  EXPECT_NEAR(dist.probs[0], std::exp(-1.0), 1e-12);
  EXPECT_NEAR(dist.probs[1], std::exp(-1.0), 1e-12);
  for (std::size_t n = 0; n < dist.probs.size(); ++n) {
    EXPECT_NEAR(dist.probs[n], poisson(1.0, n), 1e-10) << n;
  }
  EXPECT_NEAR(dist.total() + traj.ladders.back().lost_mass, 1.0, 1e-8);
}

TEST(Ladder, InitialLadderHoldsStateAtZero) {
  const QubitState q0 = QubitState::make(0.3, {0.1, -0.2});
  const auto traj = evolve_ladder(SystemParams(1.0, 0.2, 3.0, 1.0), q0, linear_grid(1.0, 2), 30);
  const auto& first = traj.ladders.front();
  EXPECT_DOUBLE_EQ(first.blocks[0].p1, 0.3);
  EXPECT_DOUBLE_EQ(first.blocks[0].p2, 0.7);
  EXPECT_EQ(first.blocks[0].c, q0.sigma12);
  for (std::size_t n = 1; n < first.blocks.size(); ++n) EXPECT_EQ(first.blocks[n].p1, 0.0);
}

TEST(Ladder, TruncationTooSmallIsLoud) {
  const SystemParams p(1.0, 0.0, 26.0, 24.0);
  try {
    evolve_ladder(p, QubitState::dot1(), linear_grid(1.0, 5), 20);
    FAIL() << "expected TruncationTooSmall";
  } catch (const TruncationTooSmall& e) {
    EXPECT_GT(e.lost_mass(), kMaxLostMass);
    EXPECT_GT(e.required_n_max(), 20u);
  }
}

TEST(Ladder, PropertiesOnRandomSuite) {
  for (const auto& c : qpc::testing::random_suite(0xabcdef, 8)) {
    const auto grid = linear_grid(c.t_max, 21);
    const auto n_max = choose_n_max(c.p, c.t_max);
    const auto ladder = evolve_ladder(c.p, c.q0, grid, n_max);
    const auto reduced = evolve_reduced(c.p, c.q0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& l = ladder.ladders[i];
      EXPECT_NEAR(l.total_mass() + l.lost_mass, 1.0, 1e-8);
      const QubitState m = l.marginal();
      EXPECT_NEAR(m.sigma11, reduced.states[i].sigma11, 1e-6);
      EXPECT_LT(std::abs(m.sigma12 - reduced.states[i].sigma12), 1e-6);
      for (const auto& b : l.blocks) {
        EXPECT_GE(b.p1, -1e-9);
        EXPECT_GE(b.p2, -1e-9);
        EXPECT_LE(std::norm(b.c), b.p1 * b.p2 + 1e-9);
      }
    }
  }
}

TEST(Ladder, MatchesCountingFieldAtReferencePoint) {
  const SystemParams p(1.0, 0.0, 26.0, 24.0);
  const double t = 0.5;
  const auto n_max = choose_n_max(p, t);
  const auto ladder = evolve_ladder(p, QubitState::dot1(), std::vector<double>{0.0, t}, n_max);
  const auto a = electron_distribution(ladder.ladders.back());
  const auto b = counting_field_distribution(p, QubitState::dot1(), t, transform_size_for(n_max));
  double tv = 0.0;
  for (std::size_t n = 0; n < std::max(a.probs.size(), b.probs.size()); ++n) {
    const double pa = n < a.probs.size() ? a.probs[n] : 0.0;
    const double pb = n < b.probs.size() ? b.probs[n] : 0.0;
    tv += std::abs(pa - pb);
  }
  EXPECT_LE(0.5 * tv, 1e-7);

  const auto mom = evolve_moments(p, QubitState::dot1(), std::vector<double>{0.0, t});
  const double mean = mom.states.back().m1_11 + mom.states.back().m1_22;
  EXPECT_NEAR(a.mean(), mean, 1e-6 * mean);
}

TEST(CountingField, PoissonLimit) {
  const SystemParams p(0.0, 0.0, 1.0, 0.0);
  const auto d = counting_field_distribution(p, QubitState::dot1(), 1.0, 64);
  for (std::size_t n = 0; n < d.probs.size(); ++n) EXPECT_NEAR(d.probs[n], poisson(1.0, n), 1e-10);
  EXPECT_NEAR(d.total(), 1.0, 1e-10);
}

TEST(CountingField, TotalIsTrace) {
  const SystemParams p(0.7, -0.4, 9.0, 2.0);
  const auto q0 = QubitState::make(0.6, {0.1, 0.3});
  const double t = 2.0;
  const auto d = counting_field_distribution(p, q0, t, transform_size_for(choose_n_max(p, t)));
  EXPECT_NEAR(d.total(), 1.0, 1e-10);
}

TEST(CountingField, RejectsBadTransformSizes) {
  const SystemParams p(1.0, 0.0, 26.0, 24.0);
  EXPECT_THROW(counting_field_distribution(p, QubitState::dot1(), 1.0, 100), std::invalid_argument);
  EXPECT_THROW(counting_field_distribution(p, QubitState::dot1(), 1.0, 64), AliasingRisk);
}

TEST(ChooseNMax, Examples) {
  // ceil(D1 t + 10 sqrt(D1 t + 1) + 10)
  EXPECT_EQ(choose_n_max(SystemParams(1.0, 0.0, 26.0, 24.0), 1.0), 88u);
  EXPECT_EQ(choose_n_max(SystemParams(0.0, 0.0, 1.0, 0.0), 10.0), 54u);
  EXPECT_EQ(choose_n_max(SystemParams(0.0, 0.0, 1.0, 0.0), 0.0), 20u);
  // mpmath: Poisson(10) mass on n >= 54 is 2.4e-22
  EXPECT_LT(poisson_tail(10.0, 53), 1e-12);
  EXPECT_NEAR(poisson_tail(10.0, 53), 2.4016568911880645e-22, 1e-33);
  EXPECT_THROW(choose_n_max(SystemParams(0.0, 0.0, 1.0, 0.0), 1.0, 1e-3), std::invalid_argument);
  EXPECT_THROW(choose_n_max(SystemParams(0.0, 0.0, 1.0, 0.0), -1.0), std::invalid_argument);
}

TEST(ChooseNMax, TailBelowTolerance) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double d1 = 100.0 * u(rng);
    const double t = 50.0 * u(rng);
    const double eps = std::pow(10.0, -6.0 - 8.0 * u(rng));
    const auto n = choose_n_max(SystemParams(0.0, 0.0, d1, 0.0), t, eps);
    EXPECT_LT(poisson_tail(d1 * t, n), eps);
  }
}

TEST(TransformSize, PowerOfTwoWithMargin) {
  EXPECT_EQ(transform_size_for(31), 64u);
  EXPECT_EQ(transform_size_for(32), 128u);
  EXPECT_EQ(transform_size_for(88), 256u);
}

}  // namespace
}  // namespace qpc
