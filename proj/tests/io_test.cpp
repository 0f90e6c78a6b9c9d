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
#include <filesystem>
#include <limits>

#include "mempower/mempower.hpp"
#include "test_util.hpp"

namespace mempower {
namespace {

using testing::Rng;

constexpr const char* kTwoAgent = R"(# two agents, scalar inputs
agents 2
state_dim 2
input_dims 1 2
budgets 1 0.5
noise_variance 0.1
block 0 0
1
0.5
block 1 1
0 1
2 0
block 0 1   # cross coupling
0.1 0
0 0.2
)";

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(Numbers, FormatRoundTrips) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.integer(-20, 20));
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_THROW(parse_double("1.5x"), Error);
  EXPECT_THROW(parse_double(""), Error);
}

TEST(Numbers, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(ChannelFile, ParsesBlocksAndHeader) {
  const ChannelProblem p = parse_channel(kTwoAgent);
  EXPECT_EQ(p.sensitivity.agents(), 2);
  EXPECT_EQ(p.sensitivity.state_dim(), 2);
  EXPECT_EQ(p.sensitivity.input_dims(), (std::vector<Index>{1, 2}));
  EXPECT_EQ(p.sensitivity.block(0, 0)(1, 0), 0.5);
  EXPECT_EQ(p.sensitivity.block(1, 1)(1, 0), 2.0);
  EXPECT_EQ(p.sensitivity.block(0, 1)(1, 1), 0.2);
  EXPECT_FALSE(p.sensitivity.block_active(1, 0));
  EXPECT_EQ(p.game.budgets[1].value(), 0.5);
  EXPECT_EQ(p.game.sensor_noise[1], 0.1 * Matrix::Identity(2, 2));
}

TEST(ChannelFile, FormatRoundTrips) {
  Rng rng(2);
  const auto game = testing::random_game(rng, 3, 3, 2, 0.5);
  ChannelProblem p{game.first, game.second};
  const ChannelProblem q = parse_channel(format_channel(p));
  EXPECT_EQ(format_channel(q), format_channel(p));
  for (Index a = 0; a < 3; ++a) {
    for (Index b = 0; b < 3; ++b) EXPECT_EQ(q.sensitivity.block(a, b), p.sensitivity.block(a, b));
    EXPECT_EQ(q.game.sensor_noise[static_cast<std::size_t>(a)],
              p.game.sensor_noise[static_cast<std::size_t>(a)]);
  }
  const auto r1 = solve_game(p.sensitivity, p.game);
  const auto r2 = solve_game(q.sensitivity, q.game);
  EXPECT_EQ(r1.empowerment, r2.empowerment);
}

TEST(ChannelFile, Errors) {
  EXPECT_EQ(code_of([] { parse_channel("agents 1\n"); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] { parse_channel("agents 2\nstate_dim 1\ninput_dims 1\nbudgets 1\n"); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] {
              parse_channel("agents 1\nstate_dim 2\ninput_dims 1\nbudgets 1\nblock 0 0\n1\n");
            }),
            ErrorCode::kParse);
  EXPECT_EQ(code_of([] {
              parse_channel("agents 1\nstate_dim 1\ninput_dims 2\nbudgets 1\nblock 0 0\n1\n");
            }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] {
              parse_channel("agents 1\nstate_dim 1\ninput_dims 1\nbudgets 1\nblock 0 1\n1\n");
            }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] { parse_channel("agents 1\ncolour blue\n"); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] {
              parse_channel("agents 1\nstate_dim 1\ninput_dims 1\nbudgets -1\n");
            }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] {
              parse_channel(
                  "agents 1\nstate_dim 1\ninput_dims 1\nbudgets 1\nblock 0 0\n1\nblock 0 0\n2\n");
            }),
            ErrorCode::kParse);
}

TEST(Csv, RoundTripAndColumns) {
  CsvTable t{{"a", "b"}, {{"1", "x"}, {"2.5", ""}}};
  const CsvTable u = CsvTable::parse(t.str());
  EXPECT_EQ(u.header, t.header);
  EXPECT_EQ(u.rows, t.rows);
  EXPECT_EQ(u.column("b"), 1u);
  EXPECT_THROW(u.column("c"), Error);
  EXPECT_THROW(CsvTable::parse("a,b\n1\n"), Error);
  EXPECT_THROW(CsvTable::parse(""), Error);
}

TEST(Configs, PendulumRoundTrip) {
  PendulumConfig c;
  c.torque_bounds = {0.3, 1.7};
  c.stiffness = 0.45;
  const PendulumConfig d = pendulum_config_from_json(to_json(c));
  EXPECT_EQ(to_json(d).dump(), to_json(c).dump());
  EXPECT_EQ(d.torque_bounds, c.torque_bounds);
}

TEST(Configs, FlockRoundTrip) {
  FlockConfig c;
  c.agents = 7;
  c.seed = 99;
  c.noise = 0.125;
  const FlockConfig d = flock_config_from_json(to_json(c));
  EXPECT_EQ(to_json(d).dump(), to_json(c).dump());
}

TEST(Configs, PartialUsesDefaults) {
  const FlockConfig d = flock_config_from_json(parse_json(R"({"agents": 3})", "test"));
  EXPECT_EQ(d.agents, 3);
  EXPECT_EQ(d.radius, FlockConfig{}.radius);
}

TEST(Configs, RejectsUnknownKeysAndBadValues) {
  EXPECT_EQ(code_of([] { pendulum_config_from_json(parse_json(R"({"mass": 1})", "t")); }),
            ErrorCode::kParse);
  EXPECT_EQ(code_of([] { flock_config_from_json(parse_json(R"({"agents": "many"})", "t")); }),
            ErrorCode::kParse);
  EXPECT_EQ(code_of([] { flock_config_from_json(parse_json(R"({"speed": -1})", "t")); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { parse_json("{", "t"); }), ErrorCode::kParse);
}

TEST(Trajectory, OneLinePerStep) {
  const PendulumConfig c;
  const PendulumEnvironment env(c);
  const GameConfig game = GameConfig::uniform(2, 1.0, selector_sensor(2, 0), 1e-2);
  ControlOptions opts;
  opts.horizon = 5;
  const auto rec =
      run_episode(env, env.hanging(), PolicyAssignment::all(2, Policy::egoistic(), 3), 4, game, opts);
  const std::string text = trajectory_jsonl(rec, 1);
  std::istringstream in(text);
  int lines = 0;
  for (std::string line; std::getline(in, line); ++lines) {
    const Json j = Json::parse(line);
    EXPECT_EQ(j.at("state").size(), 2u);
    EXPECT_EQ(j.at("state")[0].size(), 2u);
    EXPECT_EQ(j.at("action").size(), 2u);
    EXPECT_EQ(j.at("empowerment").size(), 2u);
    EXPECT_DOUBLE_EQ(j.at("time").get<double>(), lines * c.time_step);
  }
  EXPECT_EQ(lines, 4);
}

TEST(Files, WriteCreatesDirectoriesAndReadsBack) {
  const auto dir = std::filesystem::temp_directory_path() / "mempower_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  write_file(dir / "x.txt", "hello\n");
  EXPECT_EQ(read_file(dir / "x.txt"), "hello\n");
  EXPECT_EQ(code_of([&] { read_file(dir / "missing.txt"); }), ErrorCode::kIo);
  std::filesystem::remove_all(dir.parent_path());
}

}  // namespace
}  // namespace mempower
