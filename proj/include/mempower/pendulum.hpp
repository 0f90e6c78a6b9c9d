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

// Torque-limited pendulums whose tips are joined by a linear spring.
//
// Angles are measured from the hanging position, counter-clockwise positive:
// the tip of pendulum n sits at hinge_n + l_n (sin theta, -cos theta), hinges at
// (0, 0) and (d, 0). Upright is theta = pi. Per-agent state is (theta, omega).

#ifndef MEMPOWER_PENDULUM_HPP_
#define MEMPOWER_PENDULUM_HPP_

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "mempower/angles.hpp"
#include "mempower/dynamics.hpp"
#include "mempower/error.hpp"

namespace mempower {

struct PendulumConfig {
  std::vector<double> masses{1.0, 1.0};         // kg
  std::vector<double> lengths{1.0, 1.0};        // m
  std::vector<double> torque_bounds{1.0, 1.0};  // N m
  double separation = 2.0;                      // hinge distance d, m
  double gravity = 1.0;                         // m / s^2
  double damping = 0.1;                         // N m s
  double stiffness = 0.3;                       // N / m
  double rest_length = 2.0;                     // m
  double time_step = 0.01;                      // s

  Index agents() const noexcept { return static_cast<Index>(masses.size()); }

  /// A single pendulum (no tendon) with the remaining defaults.
  static PendulumConfig single(double torque_bound) {
    PendulumConfig c;
    c.masses = {1.0};
    c.lengths = {1.0};
    c.torque_bounds = {torque_bound};
    return c;
  }

  void validate() const {
    const auto n = masses.size();
    require(n == 1 || n == 2, ErrorCode::kInvalidArgument,
            "pendulum environment supports one or two agents");
    require(lengths.size() == n && torque_bounds.size() == n,
            ErrorCode::kDimensionMismatch,
            "masses, lengths and torque_bounds must have one entry per agent");
    for (std::size_t i = 0; i < n; ++i) {
      require(masses[i] > 0.0 && lengths[i] > 0.0, ErrorCode::kInvalidArgument,
              "masses and lengths must be positive");
      require(std::isfinite(torque_bounds[i]) && torque_bounds[i] >= 0.0,
              ErrorCode::kInvalidArgument, "torque bounds must be nonnegative");
    }
    require(separation > 0.0 && gravity > 0.0 && rest_length > 0.0 &&
                time_step > 0.0,
            ErrorCode::kInvalidArgument,
            "separation, gravity, rest length and time step must be positive");
    require(damping >= 0.0 && stiffness >= 0.0, ErrorCode::kInvalidArgument,
            "damping and stiffness must be nonnegative");
  }
};

class PendulumEnvironment {
 public:
  static constexpr Index kStateDim = 2;
  static constexpr Index kActionDim = 1;

  explicit PendulumEnvironment(PendulumConfig config) : config_(std::move(config)) {
    config_.validate();
  }

  const PendulumConfig& config() const noexcept { return config_; }
  Index agent_count() const noexcept { return config_.agents(); }
  Index state_dim() const noexcept { return kStateDim; }
  Index action_dim() const noexcept { return kActionDim; }
  double time_step() const noexcept { return config_.time_step; }
  double action_bound(Index n) const {
    return config_.torque_bounds[static_cast<std::size_t>(n)];
  }

  /// Both pendulums at rest, hanging straight down.
  JointState hanging() const { return JointState::zeros(agent_count(), kStateDim); }

  JointState make_state(std::span<const double> angles,
                        std::span<const double> velocities) const {
    require(static_cast<Index>(angles.size()) == agent_count() &&
                static_cast<Index>(velocities.size()) == agent_count(),
            ErrorCode::kDimensionMismatch, "one angle and velocity per agent");
    JointState x = hanging();
    for (Index n = 0; n < agent_count(); ++n) {
      x.values(2 * n) = angles[static_cast<std::size_t>(n)];
      x.values(2 * n + 1) = velocities[static_cast<std::size_t>(n)];
    }
    return x;
  }

  /// Tendon torque on each hinge, z-component of (tip - hinge) x force.
  std::array<double, 2> tendon_torques(double theta0, double theta1) const {
    return tendon_torques(std::sin(theta0), std::cos(theta0), std::sin(theta1),
                          std::cos(theta1));
  }

  std::array<double, 2> tendon_torques(double sin0, double cos0, double sin1,
                                       double cos1) const {
    if (agent_count() < 2 || config_.stiffness == 0.0) return {0.0, 0.0};
    const double r0x = config_.lengths[0] * sin0;
    const double r0y = -config_.lengths[0] * cos0;
    const double r1x = config_.lengths[1] * sin1;
    const double r1y = -config_.lengths[1] * cos1;
    const double dx = config_.separation + r1x - r0x;
    const double dy = r1y - r0y;
    const double dist = std::sqrt(dx * dx + dy * dy);
    if (dist == 0.0) return {0.0, 0.0};
    const double magnitude = config_.stiffness * (dist - config_.rest_length);
    const double fx = magnitude * dx / dist;  // force on tip 0, toward tip 1
    const double fy = magnitude * dy / dist;
    return {r0x * fy - r0y * fx, -(r1x * fy - r1y * fx)};
  }

  /// Semi-implicit Euler: omega first, then theta with the new omega.
  void advance_in_place(JointState& x, const JointAction& u) const {
    const Index n_agents = agent_count();
    std::array<double, 2> sin_t{};
    std::array<double, 2> cos_t{1.0, 1.0};
    double* v = x.values.data();
    for (Index n = 0; n < n_agents; ++n) {
      const auto i = static_cast<std::size_t>(n);
      sin_t[i] = std::sin(v[2 * n]);
      cos_t[i] = std::cos(v[2 * n]);
    }
    const auto tendon = tendon_torques(sin_t[0], cos_t[0], sin_t[1], cos_t[1]);
    const double dt = config_.time_step;
    for (Index n = 0; n < n_agents; ++n) {
      const auto i = static_cast<std::size_t>(n);
      const double m = config_.masses[i];
      const double l = config_.lengths[i];
      const double omega = v[2 * n + 1];
      const double torque = u(n) - config_.damping * omega -
                            m * config_.gravity * l * sin_t[i] + tendon[i];
      const double omega_next = omega + dt * torque / (m * l * l);
      v[2 * n + 1] = omega_next;
      v[2 * n] += dt * omega_next;
    }
    ++x.step;
  }

  JointState advance(const JointState& x, const JointAction& u) const {
    JointState next = x;
    advance_in_place(next, u);
    return next;
  }

  /// Kinetic + gravitational (zero when hanging) + tendon elastic energy, J.
  double energy(const JointState& x) const {
    double e = 0.0;
    for (Index n = 0; n < agent_count(); ++n) {
      const auto i = static_cast<std::size_t>(n);
      const double m = config_.masses[i];
      const double l = config_.lengths[i];
      const double theta = x.values(2 * n);
      const double omega = x.values(2 * n + 1);
      e += 0.5 * m * l * l * omega * omega +
           m * config_.gravity * l * (1.0 - std::cos(theta));
    }
    if (agent_count() == 2) {
      const double dx = config_.separation + config_.lengths[1] * std::sin(x.values(2)) -
                        config_.lengths[0] * std::sin(x.values(0));
      const double dy = -config_.lengths[1] * std::cos(x.values(2)) +
                        config_.lengths[0] * std::cos(x.values(0));
      const double stretch = std::hypot(dx, dy) - config_.rest_length;
      e += 0.5 * config_.stiffness * stretch * stretch;
    }
    return e;
  }

 private:
  PendulumConfig config_;
};

/// Checked single step of the linked-pendulum dynamics.
inline JointState pendulum_step(const PendulumConfig& config, const JointState& x,
                                const JointAction& u) {
  return step(PendulumEnvironment(config), x, u);
}

enum class OutcomeLabel { kLeftUp, kRightUp, kBothUp, kNeitherUp };

inline std::string_view outcome_name(OutcomeLabel label) {
  switch (label) {
    case OutcomeLabel::kLeftUp: return "LeftUp";
    case OutcomeLabel::kRightUp: return "RightUp";
    case OutcomeLabel::kBothUp: return "BothUp";
    case OutcomeLabel::kNeitherUp: return "NeitherUp";
  }
  return "NeitherUp";
}

inline OutcomeLabel parse_outcome(std::string_view name) {
  for (auto label : {OutcomeLabel::kLeftUp, OutcomeLabel::kRightUp,
                     OutcomeLabel::kBothUp, OutcomeLabel::kNeitherUp}) {
    if (outcome_name(label) == name) return label;
  }
  fail(ErrorCode::kParse, "unknown outcome label '" + std::string(name) + "'");
}

inline constexpr double kUprightBand = 1.0;  // rad either side of vertical

inline bool is_upright(double theta) {
  return std::abs(wrap_angle(theta - kPi)) <= kUprightBand;
}

/// Pendulum n is up when its angle is within one radian of vertical.
inline OutcomeLabel classify_outcome(const PendulumConfig& /*config*/,
                                     const JointState& final_state) {
  const bool left = final_state.agents >= 1 && is_upright(final_state.values(0));
  const bool right = final_state.agents >= 2 && is_upright(final_state.values(2));
  if (left && right) return OutcomeLabel::kBothUp;
  if (left) return OutcomeLabel::kLeftUp;
  if (right) return OutcomeLabel::kRightUp;
  return OutcomeLabel::kNeitherUp;
}

}  // namespace mempower

#endif  // MEMPOWER_PENDULUM_HPP_
