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

// Environments, rollouts and numerical linearization around the zero-control
// trajectory.

#ifndef MEMPOWER_DYNAMICS_HPP_
#define MEMPOWER_DYNAMICS_HPP_

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mempower/channel.hpp"
#include "mempower/error.hpp"
#include "mempower/game.hpp"

namespace mempower {

/// Stacked per-agent states. `step` counts environment steps taken and,
/// together with `seed`, addresses the noise stream of stochastic
/// environments, so stepping stays a pure function of the state.
struct JointState {
  Index agents = 0;
  Index state_dim = 0;
  Vector values;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;

  static JointState zeros(Index agents, Index state_dim) {
    return {agents, state_dim, Vector::Zero(agents * state_dim), 0, 0};
  }

  auto agent(Index n) { return values.segment(n * state_dim, state_dim); }
  auto agent(Index n) const { return values.segment(n * state_dim, state_dim); }

  bool operator==(const JointState& other) const {
    return agents == other.agents && state_dim == other.state_dim &&
           step == other.step && seed == other.seed && values == other.values;
  }
};

/// Stacked per-agent actions, agent-major: [u(0); u(1); ...].
using JointAction = Vector;

/// Per-agent open-loop action sequences over a horizon. Each agent's sequence
/// is flattened time-major: [u_0; u_1; ...; u_{t-1}], each of length d_u.
class ActionSequence {
 public:
  ActionSequence(Index agents, Index action_dim, Index horizon)
      : action_dim_(action_dim), horizon_(horizon) {
    require(agents >= 1 && action_dim >= 1 && horizon >= 1,
            ErrorCode::kInvalidArgument,
            "action sequence needs positive agents, action_dim and horizon");
    sequences_.assign(static_cast<std::size_t>(agents),
                      Vector::Zero(horizon * action_dim));
  }

  /// Packs a list of joint actions (one per step) into per-agent sequences.
  static ActionSequence from_joint_actions(std::span<const JointAction> steps,
                                           Index agents, Index action_dim) {
    ActionSequence seq(agents, action_dim, static_cast<Index>(steps.size()));
    for (Index k = 0; k < seq.horizon(); ++k) {
      seq.set_joint_action(k, steps[static_cast<std::size_t>(k)]);
    }
    return seq;
  }

  Index agents() const noexcept { return static_cast<Index>(sequences_.size()); }
  Index action_dim() const noexcept { return action_dim_; }
  Index horizon() const noexcept { return horizon_; }

  const Vector& agent_sequence(Index m) const {
    return sequences_.at(static_cast<std::size_t>(m));
  }
  Vector& agent_sequence(Index m) { return sequences_.at(static_cast<std::size_t>(m)); }

  JointAction joint_action(Index step) const {
    JointAction u(agents() * action_dim_);
    for (Index m = 0; m < agents(); ++m) {
      u.segment(m * action_dim_, action_dim_) =
          agent_sequence(m).segment(step * action_dim_, action_dim_);
    }
    return u;
  }

  void set_joint_action(Index step, const JointAction& u) {
    require(u.size() == agents() * action_dim_, ErrorCode::kDimensionMismatch,
            "joint action has wrong length");
    for (Index m = 0; m < agents(); ++m) {
      agent_sequence(m).segment(step * action_dim_, action_dim_) =
          u.segment(m * action_dim_, action_dim_);
    }
  }

  std::vector<JointAction> joint_actions() const {
    std::vector<JointAction> out;
    for (Index k = 0; k < horizon_; ++k) out.push_back(joint_action(k));
    return out;
  }

 private:
  Index action_dim_;
  Index horizon_;
  std::vector<Vector> sequences_;
};

/// A discrete-time multi-agent system x' = f(x, u). `advance` must be a pure
/// function (no hidden mutable state) and does not check action bounds.
template <class E>
concept Environment = requires(const E& env, const JointState& x,
                               const JointAction& u, Index n) {
  { env.agent_count() } -> std::convertible_to<Index>;
  { env.state_dim() } -> std::convertible_to<Index>;
  { env.action_dim() } -> std::convertible_to<Index>;
  { env.time_step() } -> std::convertible_to<double>;
  { env.action_bound(n) } -> std::convertible_to<double>;
  { env.advance(x, u) } -> std::same_as<JointState>;
};

/// Environments whose state has periodic coordinates can define how two
/// states are differenced.
template <class E>
concept HasStateDelta = requires(const E& env, const JointState& a,
                                 const JointState& b) {
  { env.state_delta(a, b) } -> std::convertible_to<Vector>;
};

/// Environments may step a state in place, which the linearizer prefers since
/// it runs thousands of short rollouts.
template <class E>
concept HasInPlaceAdvance = requires(const E& env, JointState& x,
                                     const JointAction& u) {
  env.advance_in_place(x, u);
};

template <Environment E>
void advance_in_place(const E& env, JointState& x, const JointAction& u) {
  if constexpr (HasInPlaceAdvance<E>) {
    env.advance_in_place(x, u);
  } else {
    x = env.advance(x, u);
  }
}

template <Environment E>
Vector state_delta(const E& env, const JointState& a, const JointState& b) {
  if constexpr (HasStateDelta<E>) {
    return env.state_delta(a, b);
  } else {
    return a.values - b.values;
  }
}

template <Environment E>
void check_action(const E& env, const JointAction& u) {
  const Index du = env.action_dim();
  require(u.size() == env.agent_count() * du, ErrorCode::kDimensionMismatch,
          "joint action has length " + std::to_string(u.size()) + ", expected " +
              std::to_string(env.agent_count() * du));
  for (Index m = 0; m < env.agent_count(); ++m) {
    const double bound = env.action_bound(m);
    for (Index j = 0; j < du; ++j) {
      const double a = u(m * du + j);
      require(std::isfinite(a) && std::abs(a) <= bound,
              ErrorCode::kActionOutOfBounds,
              "agent " + std::to_string(m) + " action " + std::to_string(a) +
                  " exceeds bound " + std::to_string(bound));
    }
  }
}

inline void check_finite(const JointState& x) {
  require(x.values.allFinite(), ErrorCode::kNonFiniteState,
          "dynamics produced a non-finite state at step " + std::to_string(x.step));
}

/// One bounds-checked step.
template <Environment E>
JointState step(const E& env, const JointState& x, const JointAction& u) {
  check_action(env, u);
  JointState next = env.advance(x, u);
  check_finite(next);
  return next;
}

/// [x_1, ..., x_t] under the given open-loop actions.
template <Environment E>
std::vector<JointState> rollout(const E& env, const JointState& x0,
                                const ActionSequence& actions) {
  require(actions.agents() == env.agent_count() &&
              actions.action_dim() == env.action_dim(),
          ErrorCode::kDimensionMismatch, "action sequence does not match environment");
  std::vector<JointState> states;
  states.reserve(static_cast<std::size_t>(actions.horizon()));
  JointState x = x0;
  for (Index k = 0; k < actions.horizon(); ++k) {
    x = step(env, x, actions.joint_action(k));
    states.push_back(x);
  }
  return states;
}

/// The zero-control trajectory [x_0, x_1, ..., x_t].
template <Environment E>
std::vector<JointState> autonomous_trajectory(const E& env, const JointState& x0,
                                              Index horizon) {
  const JointAction zero = JointAction::Zero(env.agent_count() * env.action_dim());
  std::vector<JointState> traj;
  traj.reserve(static_cast<std::size_t>(horizon + 1));
  traj.push_back(x0);
  for (Index k = 0; k < horizon; ++k) {
    traj.push_back(env.advance(traj.back(), zero));
    check_finite(traj.back());
  }
  return traj;
}

struct LinearizeOptions {
  // Central-difference step is step_scale * max(1, action bound).
  double step_scale = 1e-5;
};

template <Environment E>
double perturbation_step(const E& env, Index agent, const LinearizeOptions& opts) {
  return opts.step_scale * std::max(1.0, env.action_bound(agent));
}

/// Block Jacobian of the horizon-t state of the listed agents with respect to
/// their action sequences, at u = 0, by central differences. Block (i, j) of
/// the result is d x_t(agents[i]) / d u_{0:t-1}(agents[j]). The whole system is
/// simulated; only the listed agents are perturbed and read out.
template <Environment E>
SensitivityMatrix sensitivity_subset(const E& env, const JointState& x0,
                                     Index horizon, std::span<const Index> agents,
                                     const LinearizeOptions& opts = {}) {
  require(horizon >= 1, ErrorCode::kInvalidArgument, "horizon must be >= 1");
  require(!agents.empty(), ErrorCode::kEmptyInput, "no agents to linearize");
  const Index du = env.action_dim();
  const Index dx = env.state_dim();
  const auto k_agents = static_cast<Index>(agents.size());
  SensitivityMatrix sens = SensitivityMatrix::uniform(k_agents, dx, horizon * du);

  const std::vector<JointState> traj = autonomous_trajectory(env, x0, horizon);
  const JointAction zero = JointAction::Zero(env.agent_count() * du);

  JointState plus;
  JointState minus;
  auto roll = [&](JointState& x, Index k, const JointAction& u) {
    x = traj[static_cast<std::size_t>(k)];
    advance_in_place(env, x, u);
    for (Index s = k + 1; s < horizon; ++s) advance_in_place(env, x, zero);
    check_finite(x);
  };

  for (Index j = 0; j < k_agents; ++j) {
    const Index m = agents[static_cast<std::size_t>(j)];
    const double h = perturbation_step(env, m, opts);
    for (Index k = 0; k < horizon; ++k) {
      for (Index c = 0; c < du; ++c) {
        JointAction u = zero;
        u(m * du + c) = h;
        roll(plus, k, u);
        u(m * du + c) = -h;
        roll(minus, k, u);
        const Vector diff = state_delta(env, plus, minus) / (2.0 * h);
        const Index col = sens.col_offset(j) + k * du + c;
        for (Index i = 0; i < k_agents; ++i) {
          const Index n = agents[static_cast<std::size_t>(i)];
          sens.dense().block(i * dx, col, dx, 1) = diff.segment(n * dx, dx);
        }
      }
    }
  }
  return sens;
}

/// Full block sensitivity matrix; costs 2 * N * t * d_u partial rollouts.
template <Environment E>
SensitivityMatrix sensitivity(const E& env, const JointState& x0, Index horizon,
                              const LinearizeOptions& opts = {}) {
  std::vector<Index> all(static_cast<std::size_t>(env.agent_count()));
  std::iota(all.begin(), all.end(), Index{0});
  return sensitivity_subset(env, x0, horizon, std::span<const Index>(all), opts);
}

/// Zeroes block (n, m) whenever m is not in neighbor_sets[n]. Diagonal blocks
/// are always kept.
inline SensitivityMatrix sparsify(const SensitivityMatrix& sens,
                                  const std::vector<std::vector<Index>>& neighbor_sets) {
  require(static_cast<Index>(neighbor_sets.size()) == sens.agents(),
          ErrorCode::kDimensionMismatch, "one neighbor set per agent is required");
  SensitivityMatrix out = sens;
  for (Index n = 0; n < sens.agents(); ++n) {
    const auto& set = neighbor_sets[static_cast<std::size_t>(n)];
    for (Index m = 0; m < sens.agents(); ++m) {
      if (m == n) continue;
      if (std::find(set.begin(), set.end(), m) == set.end()) out.clear_block(n, m);
    }
  }
  return out;
}

/// y = C x for one agent's state.
inline Vector sensor_output(const Matrix& sensor, const Vector& state) {
  require(sensor.cols() == state.size(), ErrorCode::kDimensionMismatch,
          "sensor has " + std::to_string(sensor.cols()) +
              " columns but state has " + std::to_string(state.size()) +
              " entries");
  return sensor * state;
}

/// Sensor picking a single state coordinate.
inline Matrix selector_sensor(Index state_dim, Index coordinate) {
  Matrix c = Matrix::Zero(1, state_dim);
  c(0, coordinate) = 1.0;
  return c;
}

/// x' = A x + B u on the stacked state. Used as a reference system.
class LinearEnvironment {
 public:
  LinearEnvironment(Matrix a, Matrix b, Index agents, double action_bound = 1.0,
                    double time_step = 1.0)
      : a_(std::move(a)), b_(std::move(b)), agents_(agents),
        bound_(action_bound), dt_(time_step) {
    require(agents >= 1 && a_.rows() == a_.cols() && a_.rows() % agents == 0 &&
                b_.rows() == a_.rows() && b_.cols() % agents == 0,
            ErrorCode::kDimensionMismatch, "inconsistent linear system shapes");
  }

  Index agent_count() const noexcept { return agents_; }
  Index state_dim() const noexcept { return a_.rows() / agents_; }
  Index action_dim() const noexcept { return b_.cols() / agents_; }
  double time_step() const noexcept { return dt_; }
  double action_bound(Index) const noexcept { return bound_; }
  const Matrix& a() const noexcept { return a_; }
  const Matrix& b() const noexcept { return b_; }

  JointState advance(const JointState& x, const JointAction& u) const {
    JointState next = x;
    next.values.noalias() = a_ * x.values + b_ * u;
    ++next.step;
    return next;
  }

 private:
  Matrix a_;
  Matrix b_;
  Index agents_;
  double bound_;
  double dt_;
};

}  // namespace mempower

#endif  // MEMPOWER_DYNAMICS_HPP_
