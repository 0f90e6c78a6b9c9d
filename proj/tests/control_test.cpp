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

GameConfig pendulum_game_for(const PendulumConfig& c) {
  GameConfig g = GameConfig::uniform(c.agents(), 1.0, selector_sensor(2, 0), 1e-2);
  for (Index n = 0; n < c.agents(); ++n) {
    const double tau = c.torque_bounds[static_cast<std::size_t>(n)];
    g.budgets[static_cast<std::size_t>(n)] = PowerBudget(tau * tau);
  }
  return g;
}

ControlOptions short_horizon(Index h) {
  ControlOptions o;
  o.horizon = h;
  return o;
}

TEST(Candidates, Examples) {
  const std::vector<double> five{-1.0, -0.5, 0.0, 0.5, 1.0};
  EXPECT_EQ(candidate_actions(1.0, 5), five);
  EXPECT_EQ(candidate_actions(2.0, 2), (std::vector<double>{-2.0, 2.0}));
  EXPECT_EQ(candidate_actions(0.0, 3), (std::vector<double>(3, 0.0)));
  EXPECT_THROW(candidate_actions(1.0, 1), Error);
  EXPECT_THROW(candidate_actions(-1.0, 3), Error);
  // Odd grids contain an exact zero.
  EXPECT_EQ(candidate_actions(0.3, 7)[3], 0.0);
}

TEST(Policies, ParseAndName) {
  EXPECT_EQ(parse_policy("egoistic"), Policy::egoistic());
  EXPECT_EQ(parse_policy("passive"), Policy::passive());
  EXPECT_EQ(parse_policy("altruistic:1"), Policy::altruistic(1));
  EXPECT_EQ(policy_name(Policy::altruistic(3)), "altruistic:3");
  for (const char* bad : {"", "greedy", "altruistic:", "altruistic:x", "altruistic:-1",
                          "altruistic:1x"}) {
    EXPECT_THROW(parse_policy(bad), Error) << bad;
  }
}

TEST(Policies, AssignmentValidation) {
  PolicyAssignment a{{Policy::altruistic(0), Policy::egoistic()}, 5};
  EXPECT_THROW(a.validate(2), Error);
  a.policies[0] = Policy::altruistic(5);
  EXPECT_THROW(a.validate(2), Error);
  a.policies[0] = Policy::altruistic(1);
  EXPECT_NO_THROW(a.validate(2));
  EXPECT_THROW(a.validate(3), Error);
  a.candidates = 1;
  EXPECT_THROW(a.validate(2), Error);
}

TEST(SelectAction, MatchesExhaustiveOracle) {
  const PendulumConfig c = PendulumConfig::single(1.5);
  const PendulumEnvironment env(c);
  const GameConfig game = pendulum_game_for(c);
  const ControlOptions opts = short_horizon(40);
  const JointState x = env.make_state(std::vector{0.6}, std::vector{-0.4});
  const auto pa = PolicyAssignment::all(1, Policy::egoistic(), 3);
  const ActionChoice choice = select_action(env, x, 0, pa, game, opts);

  double best = -1.0;
  double best_u = 0.0;
  for (double u : candidate_actions(1.5, 3)) {
    const JointState next = step(env, x, JointAction::Constant(1, u));
    const double e = solve_game(sensitivity(env, next, opts.horizon), game).empowerment[0];
    if (e > best) {
      best = e;
      best_u = u;
    }
  }
  EXPECT_FALSE(choice.flagged);
  EXPECT_EQ(choice.action(0), best_u);
  EXPECT_NEAR(choice.value, best, 1e-12);
}

TEST(SelectAction, NestedGridsImproveMonotonically) {
  const PendulumConfig c = PendulumConfig::single(1.0);
  const PendulumEnvironment env(c);
  const GameConfig game = pendulum_game_for(c);
  const ControlOptions opts = short_horizon(30);
  const JointState x = env.make_state(std::vector{1.1}, std::vector{0.7});
  double last = -1.0;
  for (int m : {3, 5, 9, 101}) {
    const auto pa = PolicyAssignment::all(1, Policy::egoistic(), m);
    const double v = select_action(env, x, 0, pa, game, opts).value;
    EXPECT_GE(v, last - 1e-12) << m;
    last = v;
  }
}

TEST(SelectAction, NoInfluenceTiesToZero) {
  // Without the tendon, agent 0 cannot affect agent 1, so every candidate
  // ties and the smallest-norm one wins.
  PendulumConfig c;
  c.stiffness = 0.0;
  const PendulumEnvironment env(c);
  const GameConfig game = pendulum_game_for(c);
  const JointState x = env.make_state(std::vector{0.3, -0.2}, std::vector{0.1, 0.0});
  const PolicyAssignment pa{{Policy::altruistic(1), Policy::egoistic()}, 5};
  const ActionChoice choice = select_action(env, x, 0, pa, game, short_horizon(20));
  EXPECT_EQ(choice.action(0), 0.0);
}

TEST(SelectAction, DecoupledChoiceIgnoresOtherAgent) {
  PendulumConfig c;
  c.stiffness = 0.0;
  const PendulumEnvironment env(c);
  const GameConfig game = pendulum_game_for(c);
  const auto pa = PolicyAssignment::all(2, Policy::egoistic(), 5);
  const JointState a = env.make_state(std::vector{0.5, 0.0}, std::vector{0.2, 0.0});
  const JointState b = env.make_state(std::vector{0.5, 2.5}, std::vector{0.2, -1.0});
  const auto ca = select_action(env, a, 0, pa, game, short_horizon(25));
  const auto cb = select_action(env, b, 0, pa, game, short_horizon(25));
  EXPECT_EQ(ca.action, cb.action);
  EXPECT_NEAR(ca.value, cb.value, 1e-9);
}

TEST(SelectAction, MemoMatchesDirectEvaluation) {
  const PendulumConfig c;
  const PendulumEnvironment env(c);
  const GameConfig game = pendulum_game_for(c);
  const auto pa = PolicyAssignment::all(2, Policy::egoistic(), 5);
  const JointState x = env.make_state(std::vector{0.9, -0.3}, std::vector{0.5, 0.2});
  CandidateMemo memo;
  for (Index n = 0; n < 2; ++n) {
    const auto direct = select_action(env, x, n, pa, game, short_horizon(20));
    const auto cached = select_action(env, x, n, pa, game, short_horizon(20), nullptr, &memo);
    EXPECT_EQ(direct.action, cached.action);
    EXPECT_EQ(direct.value, cached.value);
  }
  // The zero joint action is shared by both agents and solved once.
  EXPECT_EQ(memo.entries.size(), 9u);
}

TEST(SelectAction, RejectsPassiveAgent) {
  const PendulumConfig c;
  const PendulumEnvironment env(c);
  const auto pa = PolicyAssignment::all(2, Policy::passive(), 5);
  EXPECT_THROW(select_action(env, env.hanging(), 0, pa, pendulum_game_for(c), short_horizon(5)),
               Error);
}

TEST(Episode, PassiveAgentsStayAtRest) {
  const PendulumConfig c;
  const PendulumEnvironment env(c);
  const auto rec = run_episode(env, env.hanging(), PolicyAssignment::all(2, Policy::passive(), 5),
                               20, pendulum_game_for(c), short_horizon(10));
  ASSERT_EQ(rec.steps.size(), 20u);
  for (const auto& s : rec.steps) {
    EXPECT_EQ(s.action, JointAction::Zero(2));
    for (double e : s.empowerment) EXPECT_GE(e, 0.0);
  }
  EXPECT_EQ(rec.final_state.values, env.hanging().values);
  EXPECT_FALSE(rec.aborted);
}

TEST(Episode, DeterministicAndNonnegative) {
  const PendulumConfig c;
  const PendulumEnvironment env(c);
  const auto pa = PolicyAssignment::all(2, Policy::egoistic(), 3);
  const JointState x0 = env.make_state(std::vector{0.2, -0.1}, std::vector{0.0, 0.0});
  const auto a = run_episode(env, x0, pa, 15, pendulum_game_for(c), short_horizon(15));
  const auto b = run_episode(env, x0, pa, 15, pendulum_game_for(c), short_horizon(15));
  EXPECT_EQ(a.final_state, b.final_state);
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    EXPECT_EQ(a.steps[k].action, b.steps[k].action);
    EXPECT_EQ(a.steps[k].empowerment, b.steps[k].empowerment);
    for (double e : a.steps[k].empowerment) EXPECT_GE(e, 0.0);
    EXPECT_TRUE(a.steps[k].converged);
  }
}

TEST(Episode, ActionsRespectBounds) {
  PendulumConfig c;
  c.torque_bounds = {0.4, 1.3};
  const PendulumEnvironment env(c);
  const auto rec = run_episode(env, env.hanging(), PolicyAssignment::all(2, Policy::egoistic(), 5),
                               25, pendulum_game_for(c), short_horizon(15));
  for (const auto& s : rec.steps) {
    EXPECT_LE(std::abs(s.action(0)), 0.4);
    EXPECT_LE(std::abs(s.action(1)), 1.3);
  }
}

TEST(Episode, SinglePendulumSwingsUp) {
  const PendulumConfig c = PendulumConfig::single(2.0);
  const PendulumEnvironment env(c);
  ControlOptions opts = short_horizon(130);
  const auto rec = run_episode(env, env.hanging(), PolicyAssignment::all(1, Policy::egoistic(), 5),
                               800, pendulum_game_for(c), opts);
  ASSERT_FALSE(rec.aborted) << rec.error;
  EXPECT_EQ(classify_outcome(c, rec.final_state), OutcomeLabel::kLeftUp);
}

TEST(Episode, FlockLocalEvaluationRuns) {
  FlockConfig c;
  c.agents = 6;
  c.domain = 3.0;
  const FlockEnvironment env(c);
  const GameConfig game = GameConfig::uniform(6, 4.0, selector_sensor(4, 2), 1e-2);
  ControlOptions opts = short_horizon(5);
  opts.local_radius = c.radius;
  const auto rec = run_episode(env, env.random_state(), PolicyAssignment::all(6, Policy::egoistic(), 3),
                               5, game, opts);
  ASSERT_FALSE(rec.aborted) << rec.error;
  EXPECT_EQ(rec.steps.size(), 5u);
  EXPECT_EQ(rec.final_state.step, 5u);
}

}  // namespace
}  // namespace mempower
