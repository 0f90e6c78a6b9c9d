// Copyright 2026 The mempower Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "mempower/mempower.hpp"
#include "test_util.hpp"

namespace mempower {
namespace {

using testing::Rng;

constexpr Index kD = FlockEnvironment::kStateDim;

JointState place(Index n, const std::vector<std::array<double, 3>>& agents) {
  JointState x = JointState::zeros(n, kD);
  for (Index i = 0; i < n; ++i) {
    const auto& a = agents[static_cast<std::size_t>(i)];
    x.values(i * kD + 0) = a[0];
    x.values(i * kD + 1) = a[1];
    x.values(i * kD + 2) = a[2];
  }
  return x;
}

TEST(Flock, LoneAgentMovesStraight) {
  FlockConfig c;
  c.agents = 1;
  c.noise = 0.0;
  const FlockEnvironment env(c);
  JointState x = place(1, {{1.0, 2.0, 0.3}});
  for (int k = 0; k < 10; ++k) x = step(env, x, JointAction::Zero(1));
  EXPECT_DOUBLE_EQ(x.values(2), 0.3);
  const double travel = 10 * c.time_step * c.speed;
  EXPECT_NEAR(x.values(0), 1.0 + travel * std::cos(0.3), 1e-12);
  EXPECT_NEAR(x.values(1), 2.0 + travel * std::sin(0.3), 1e-12);
}

TEST(Flock, AlignedPairKeepsHeadings) {
  FlockConfig c;
  c.agents = 2;
  c.noise = 0.0;
  const FlockEnvironment env(c);
  JointState x = place(2, {{5.0, 5.0, 1.1}, {5.0, 5.0, 1.1}});
  for (int k = 0; k < 20; ++k) x = step(env, x, JointAction::Zero(2));
  EXPECT_DOUBLE_EQ(x.values(2), 1.1);
  EXPECT_DOUBLE_EQ(x.values(kD + 2), 1.1);
}

TEST(Flock, ConsensusRateMatchesLaplacianOracle) {
  FlockConfig c;
  c.agents = 5;
  c.noise = 0.0;
  c.domain = 50.0;
  const FlockEnvironment env(c);
  Rng rng(1);
  std::vector<std::array<double, 3>> agents;
  for (int i = 0; i < 5; ++i) {
    agents.push_back({20.0 + rng.uniform(0.0, 0.3), 20.0 + rng.uniform(0.0, 0.3),
                      0.7 + 1e-3 * rng.normal()});
  }
  JointState x = place(5, agents);

  // Linearized update of deviations: I - dt k (I - W), W the row-normalized
  // neighbor matrix (self included). Its largest non-consensus eigenvalue is
  // the per-step contraction.
  const auto sets = env.neighbor_sets(x, c.radius);
  Matrix w = Matrix::Zero(5, 5);
  for (Index i = 0; i < 5; ++i) {
    const auto& s = sets[static_cast<std::size_t>(i)];
    for (Index j : s) w(i, j) = 1.0 / static_cast<double>(s.size());
  }
  const Matrix update =
      Matrix::Identity(5, 5) - c.time_step * c.alignment * (Matrix::Identity(5, 5) - w);
  const Eigen::EigenSolver<Matrix> solver(update);
  std::vector<double> mags;
  for (const auto& l : solver.eigenvalues()) mags.push_back(std::abs(l));
  std::sort(mags.begin(), mags.end());
  const double predicted = mags[3];  // largest is the consensus mode (1)

  auto spread = [&](const JointState& s) {
    double mean = 0.0;
    for (Index i = 0; i < 5; ++i) mean += s.values(i * kD + 2) / 5.0;
    double sq = 0.0;
    for (Index i = 0; i < 5; ++i) sq += std::pow(s.values(i * kD + 2) - mean, 2);
    return std::sqrt(sq);
  };
  for (int k = 0; k < 20; ++k) x = step(env, x, JointAction::Zero(5));
  const double before = spread(x);
  x = step(env, x, JointAction::Zero(5));
  EXPECT_NEAR(spread(x) / before, predicted, 1e-3);
}

TEST(Flock, SpeedIsConstant) {
  FlockConfig c;
  const FlockEnvironment env(c);
  JointState x = env.random_state();
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    JointAction u(c.agents);
    for (Index i = 0; i < c.agents; ++i) u(i) = rng.uniform(-c.accel_bound, c.accel_bound);
    const JointState next = step(env, x, u);
    const Vector d = env.state_delta(next, x);
    for (Index i = 0; i < c.agents; ++i) {
      EXPECT_NEAR(std::hypot(d(i * kD), d(i * kD + 1)), c.speed * c.time_step, 1e-12);
    }
    x = next;
  }
}

TEST(Flock, PeriodicTranslationLeavesHeadingsUnchanged) {
  FlockConfig c;
  const FlockEnvironment env(c);
  JointState a = env.random_state();
  JointState b = a;
  for (Index i = 0; i < c.agents; ++i) {
    b.values(i * kD) = detail::periodic_wrap(b.values(i * kD) + 2.5, c.domain);
    b.values(i * kD + 1) = detail::periodic_wrap(b.values(i * kD + 1) + 7.5, c.domain);
  }
  for (int k = 0; k < 300; ++k) {
    a = step(env, a, JointAction::Zero(c.agents));
    b = step(env, b, JointAction::Zero(c.agents));
  }
  for (Index i = 0; i < c.agents; ++i) {
    EXPECT_NEAR(a.values(i * kD + 2), b.values(i * kD + 2), 1e-9);
  }
}

TEST(Flock, NoiseIsPureFunctionOfState) {
  FlockConfig c;
  const FlockEnvironment env(c);
  const JointState x = env.random_state();
  const JointAction u = JointAction::Zero(c.agents);
  EXPECT_EQ(env.advance(x, u), env.advance(x, u));
  JointState other = x;
  other.seed += 1;
  EXPECT_NE(env.advance(x, u).values, env.advance(other, u).values);
}

TEST(Flock, CellListMatchesBruteForce) {
  FlockConfig c;
  c.agents = 300;
  c.domain = 12.0;
  c.radius = 1.3;
  const FlockEnvironment env(c);
  const JointState x = env.random_state();
  const auto sets = env.neighbor_sets(x, c.radius);
  for (Index i = 0; i < c.agents; ++i) {
    std::vector<Index> brute;
    for (Index j = 0; j < c.agents; ++j) {
      if (j == i || env.squared_distance(x, i, j) <= c.radius * c.radius) brute.push_back(j);
    }
    EXPECT_EQ(sets[static_cast<std::size_t>(i)], brute);
  }
}

TEST(Flock, RandomStateInsideDomain) {
  FlockConfig c;
  c.agents = 100;
  const FlockEnvironment env(c);
  const JointState x = env.random_state();
  for (Index i = 0; i < c.agents; ++i) {
    EXPECT_GE(x.values(i * kD), 0.0);
    EXPECT_LT(x.values(i * kD), c.domain);
    EXPECT_GE(x.values(i * kD + 1), 0.0);
    EXPECT_LT(x.values(i * kD + 1), c.domain);
    EXPECT_GT(x.values(i * kD + 2), -kPi);
    EXPECT_LE(x.values(i * kD + 2), kPi);
  }
}

TEST(Flock, StateDeltaUsesMinimumImage) {
  FlockConfig c;
  c.agents = 1;
  const FlockEnvironment env(c);
  const JointState a = place(1, {{9.9, 0.1, 0.0}});
  const JointState b = place(1, {{0.1, 9.9, 0.0}});
  const Vector d = env.state_delta(a, b);
  EXPECT_NEAR(d(0), -0.2, 1e-12);
  EXPECT_NEAR(d(1), 0.2, 1e-12);
}

TEST(Flock, PassiveBaselineOrders) {
  FlockConfig c;
  const FlockEnvironment env(c);
  JointState x = env.random_state();
  for (int k = 0; k < 2000; ++k) x = env.advance(x, JointAction::Zero(c.agents));
  EXPECT_GE(order_parameter(env.headings(x)), 0.95);
}

TEST(Flock, ConfigValidation) {
  FlockConfig c;
  c.speed = 0.0;
  EXPECT_THROW(FlockEnvironment{c}, Error);
  c = FlockConfig{};
  c.noise = -1.0;
  EXPECT_THROW(FlockEnvironment{c}, Error);
  c = FlockConfig{};
  c.agents = 0;
  EXPECT_THROW(FlockEnvironment{c}, Error);
}

}  // namespace
}  // namespace mempower
