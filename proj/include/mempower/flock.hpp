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

// Continuous-heading Vicsek flock in a periodic square, where each agent
// additionally steers through a damped angular velocity driven by its action
// (an angular acceleration). Per-agent state is (x, y, theta, omega).
//
// Headings stay unwrapped inside the state; wrapping happens only where
// headings are observed.

#ifndef MEMPOWER_FLOCK_HPP_
#define MEMPOWER_FLOCK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mempower/angles.hpp"
#include "mempower/dynamics.hpp"
#include "mempower/error.hpp"

namespace mempower {

struct FlockConfig {
  Index agents = 25;
  double speed = 0.5;              // m / s
  double radius = 1.0;             // interaction radius, m
  double alignment = 2.0;          // 1 / s
  double noise = 0.05;             // heading noise amplitude, rad
  double accel_bound = 2.0;        // rad / s^2
  double angular_damping = 0.5;    // 1 / s
  double domain = 10.0;            // periodic side length, m
  double time_step = 0.05;         // s
  std::uint64_t seed = 1;

  void validate() const {
    require(agents >= 1, ErrorCode::kInvalidArgument, "flock needs at least one agent");
    require(speed > 0.0 && radius > 0.0 && domain > 0.0 && time_step > 0.0,
            ErrorCode::kInvalidArgument,
            "speed, radius, domain and time step must be positive");
    require(noise >= 0.0 && accel_bound >= 0.0 && angular_damping >= 0.0 &&
                alignment >= 0.0,
            ErrorCode::kInvalidArgument,
            "noise, accel bound, damping and alignment must be nonnegative");
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform on [-1/2, 1/2), addressed by (seed, step, agent).
inline double counter_uniform(std::uint64_t seed, std::uint64_t step,
                              std::uint64_t agent) {
  const std::uint64_t h =
      splitmix64(splitmix64(splitmix64(seed) ^ step) ^ (agent * 0xd1b54a32d192ed03ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5;
}

inline double periodic_wrap(double p, double side) {
  double w = p - side * std::floor(p / side);
  if (w >= side) w -= side;
  return w;
}

inline double minimum_image(double d, double side) {
  return d - side * std::round(d / side);
}

}  // namespace detail

class FlockEnvironment {
 public:
  static constexpr Index kStateDim = 4;
  static constexpr Index kActionDim = 1;
  static constexpr Index kX = 0;
  static constexpr Index kY = 1;
  static constexpr Index kHeading = 2;
  static constexpr Index kTurnRate = 3;
  static constexpr Index kCellListMinAgents = 64;

  explicit FlockEnvironment(FlockConfig config) : config_(config) {
    config_.validate();
  }

  const FlockConfig& config() const noexcept { return config_; }
  Index agent_count() const noexcept { return config_.agents; }
  Index state_dim() const noexcept { return kStateDim; }
  Index action_dim() const noexcept { return kActionDim; }
  double time_step() const noexcept { return config_.time_step; }
  double action_bound(Index) const noexcept { return config_.accel_bound; }

  /// Uniform positions and headings, zero turn rates, from config.seed.
  JointState random_state() const {
    std::mt19937_64 rng(config_.seed);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    JointState x = JointState::zeros(agent_count(), kStateDim);
    x.seed = config_.seed;
    for (Index n = 0; n < agent_count(); ++n) {
      x.values(n * kStateDim + kX) = config_.domain * unit();
      x.values(n * kStateDim + kY) = config_.domain * unit();
      x.values(n * kStateDim + kHeading) = wrap_angle(kTwoPi * unit() - kPi);
    }
    return x;
  }

  std::vector<double> headings(const JointState& x) const {
    std::vector<double> out(static_cast<std::size_t>(x.agents));
    for (Index n = 0; n < x.agents; ++n) {
      out[static_cast<std::size_t>(n)] = wrap_angle(x.values(n * kStateDim + kHeading));
    }
    return out;
  }

  double squared_distance(const JointState& x, Index a, Index b) const {
    const double dx = detail::minimum_image(
        x.values(a * kStateDim + kX) - x.values(b * kStateDim + kX), config_.domain);
    const double dy = detail::minimum_image(
        x.values(a * kStateDim + kY) - x.values(b * kStateDim + kY), config_.domain);
    return dx * dx + dy * dy;
  }

  /// Agents within `radius` of each agent (self included), ascending index.
  std::vector<std::vector<Index>> neighbor_sets(const JointState& x,
                                                double radius) const {
    const Index n_agents = x.agents;
    std::vector<std::vector<Index>> sets(static_cast<std::size_t>(n_agents));
    const double r2 = radius * radius;
    const auto cells = static_cast<Index>(std::floor(config_.domain / radius));
    if (cells < 4 || n_agents < kCellListMinAgents) {
      for (Index i = 0; i < n_agents; ++i) {
        auto& s = sets[static_cast<std::size_t>(i)];
        for (Index j = 0; j < n_agents; ++j) {
          if (j == i || squared_distance(x, i, j) <= r2) s.push_back(j);
        }
      }
      return sets;
    }
    // Cell list with side >= radius; only the 3x3 block around a cell is
    // searched.
    const double cell = config_.domain / static_cast<double>(cells);
    std::vector<std::vector<Index>> bins(static_cast<std::size_t>(cells * cells));
    auto cell_of = [&](double p) {
      auto c = static_cast<Index>(std::floor(detail::periodic_wrap(p, config_.domain) / cell));
      return std::min(c, cells - 1);
    };
    std::vector<Index> home(static_cast<std::size_t>(n_agents));
    for (Index i = 0; i < n_agents; ++i) {
      const Index cx = cell_of(x.values(i * kStateDim + kX));
      const Index cy = cell_of(x.values(i * kStateDim + kY));
      home[static_cast<std::size_t>(i)] = cy * cells + cx;
      bins[static_cast<std::size_t>(cy * cells + cx)].push_back(i);
    }
    for (Index i = 0; i < n_agents; ++i) {
      auto& s = sets[static_cast<std::size_t>(i)];
      const Index cx = home[static_cast<std::size_t>(i)] % cells;
      const Index cy = home[static_cast<std::size_t>(i)] / cells;
      for (Index oy = -1; oy <= 1; ++oy) {
        for (Index ox = -1; ox <= 1; ++ox) {
          const Index bx = (cx + ox + cells) % cells;
          const Index by = (cy + oy + cells) % cells;
          for (Index j : bins[static_cast<std::size_t>(by * cells + bx)]) {
            if (j == i || squared_distance(x, i, j) <= r2) s.push_back(j);
          }
        }
      }
      std::sort(s.begin(), s.end());
    }
    return sets;
  }

  /// One step. Neighbor headings are summed in ascending agent index, the
  /// same order neighbor_sets() reports.
  void advance_in_place(JointState& x, const JointAction& u) const {
    const Index n_agents = x.agents;
    const double dt = config_.time_step;
    thread_local std::vector<double> scratch;
    scratch.resize(static_cast<std::size_t>(4 * n_agents));
    double* sin_h = scratch.data();
    double* cos_h = sin_h + n_agents;
    double* sum_s = cos_h + n_agents;
    double* sum_c = sum_s + n_agents;
    double* v = x.values.data();
    for (Index n = 0; n < n_agents; ++n) {
      sin_h[n] = std::sin(v[n * kStateDim + kHeading]);
      cos_h[n] = std::cos(v[n * kStateDim + kHeading]);
    }
    if (n_agents < kCellListMinAgents) {
      // Each pair is tested once; sums still accumulate in ascending index.
      const double r2 = config_.radius * config_.radius;
      std::fill(sum_s, sum_s + 2 * n_agents, 0.0);
      for (Index n = 0; n < n_agents; ++n) {
        sum_s[n] += sin_h[n];
        sum_c[n] += cos_h[n];
        const double xn = v[n * kStateDim + kX];
        const double yn = v[n * kStateDim + kY];
        for (Index j = n + 1; j < n_agents; ++j) {
          const double dx = detail::minimum_image(xn - v[j * kStateDim + kX], config_.domain);
          const double dy = detail::minimum_image(yn - v[j * kStateDim + kY], config_.domain);
          if (dx * dx + dy * dy <= r2) {
            sum_s[n] += sin_h[j];
            sum_c[n] += cos_h[j];
            sum_s[j] += sin_h[n];
            sum_c[j] += cos_h[n];
          }
        }
      }
    } else {
      const auto sets = neighbor_sets(x, config_.radius);
      for (Index n = 0; n < n_agents; ++n) {
        double s = 0.0;
        double c = 0.0;
        for (Index j : sets[static_cast<std::size_t>(n)]) {
          s += sin_h[j];
          c += cos_h[j];
        }
        sum_s[n] = s;
        sum_c[n] = c;
      }
    }

    const double step_len = dt * config_.speed;
    for (Index n = 0; n < n_agents; ++n) {
      const double mean = std::atan2(sum_s[n], sum_c[n]);
      double* a = v + n * kStateDim;
      const double heading = a[kHeading];
      const double omega_next = a[kTurnRate] + dt * (u(n) - config_.angular_damping * a[kTurnRate]);
      double heading_next =
          heading + dt * (config_.alignment * wrap_angle(mean - heading) + omega_next);
      if (config_.noise > 0.0) {
        heading_next += config_.noise *
                        detail::counter_uniform(x.seed, x.step, static_cast<std::uint64_t>(n));
      }
      a[kTurnRate] = omega_next;
      a[kHeading] = heading_next;
      a[kX] = detail::periodic_wrap(a[kX] + step_len * std::cos(heading_next), config_.domain);
      a[kY] = detail::periodic_wrap(a[kY] + step_len * std::sin(heading_next), config_.domain);
    }
    ++x.step;
  }

  JointState advance(const JointState& x, const JointAction& u) const {
    JointState next = x;
    advance_in_place(next, u);
    return next;
  }

  /// Differences with positions taken by minimum image.
  Vector state_delta(const JointState& a, const JointState& b) const {
    Vector d = a.values - b.values;
    for (Index n = 0; n < a.agents; ++n) {
      d(n * kStateDim + kX) = detail::minimum_image(d(n * kStateDim + kX), config_.domain);
      d(n * kStateDim + kY) = detail::minimum_image(d(n * kStateDim + kY), config_.domain);
    }
    return d;
  }

 private:
  FlockConfig config_;
};

/// Checked single step of the controllable flock.
inline JointState flock_step(const FlockConfig& config, const JointState& x,
                             const JointAction& u) {
  return step(FlockEnvironment(config), x, u);
}

}  // namespace mempower

#endif  // MEMPOWER_FLOCK_HPP_
