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

// The N-agent probing game on a Gaussian interference channel.
//
// Agent n transmits its action sequence through C_n F(n,n) to its own sensed
// output; every other agent m leaks into it through C_n F(n,m). Each agent
// water-fills against the interference of the others, and iterating these best
// responses (Gauss-Seidel, agents in index order) reaches a Nash fixed point.

#ifndef MEMPOWER_GAME_HPP_
#define MEMPOWER_GAME_HPP_

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "mempower/channel.hpp"
#include "mempower/error.hpp"

namespace mempower {

/// Block Jacobian of the horizon-t joint state with respect to every agent's
/// flattened action sequence. Block (n, m) has state_dim rows and
/// input_dim(m) = t * d_u(m) columns. Blocks can be marked inactive (known
/// zero), which lets the game skip them.
class SensitivityMatrix {
 public:
  SensitivityMatrix() = default;

  SensitivityMatrix(Index agents, Index state_dim, std::vector<Index> input_dims)
      : agents_(agents), state_dim_(state_dim), input_dims_(std::move(input_dims)) {
    require(agents >= 1 && state_dim >= 1, ErrorCode::kDimensionMismatch,
            "sensitivity needs at least one agent and one state coordinate");
    require(static_cast<Index>(input_dims_.size()) == agents,
            ErrorCode::kDimensionMismatch,
            "one input dimension per agent is required");
    col_offsets_.resize(input_dims_.size() + 1, 0);
    for (std::size_t m = 0; m < input_dims_.size(); ++m) {
      require(input_dims_[m] >= 1, ErrorCode::kDimensionMismatch,
              "input dimension must be positive");
      col_offsets_[m + 1] = col_offsets_[m] + input_dims_[m];
    }
    dense_ = Matrix::Zero(agents * state_dim, col_offsets_.back());
    active_.assign(static_cast<std::size_t>(agents * agents), 1);
  }

  static SensitivityMatrix uniform(Index agents, Index state_dim,
                                   Index input_dim) {
    return SensitivityMatrix(
        agents, state_dim,
        std::vector<Index>(static_cast<std::size_t>(agents), input_dim));
  }

  Index agents() const noexcept { return agents_; }
  Index state_dim() const noexcept { return state_dim_; }
  Index input_dim(Index m) const { return input_dims_.at(static_cast<std::size_t>(m)); }
  const std::vector<Index>& input_dims() const noexcept { return input_dims_; }
  Index row_offset(Index n) const noexcept { return n * state_dim_; }
  Index col_offset(Index m) const { return col_offsets_.at(static_cast<std::size_t>(m)); }

  auto block(Index n, Index m) {
    return dense_.block(row_offset(n), col_offset(m), state_dim_, input_dim(m));
  }
  auto block(Index n, Index m) const {
    return dense_.block(row_offset(n), col_offset(m), state_dim_, input_dim(m));
  }

  /// Full (N * d_x) x (sum of input dims) matrix.
  const Matrix& dense() const noexcept { return dense_; }
  Matrix& dense() noexcept { return dense_; }

  bool block_active(Index n, Index m) const {
    return active_[static_cast<std::size_t>(n * agents_ + m)] != 0;
  }

  /// Zeroes block (n, m) and marks it inactive.
  void clear_block(Index n, Index m) {
    block(n, m).setZero();
    active_[static_cast<std::size_t>(n * agents_ + m)] = 0;
  }

  /// Sub-game restricted to the listed agents, in the listed order.
  SensitivityMatrix restricted(const std::vector<Index>& agents) const {
    std::vector<Index> dims;
    dims.reserve(agents.size());
    for (Index a : agents) dims.push_back(input_dim(a));
    SensitivityMatrix out(static_cast<Index>(agents.size()), state_dim_,
                          std::move(dims));
    for (std::size_t i = 0; i < agents.size(); ++i) {
      for (std::size_t j = 0; j < agents.size(); ++j) {
        const Index n = agents[i];
        const Index m = agents[j];
        const auto ii = static_cast<Index>(i);
        const auto jj = static_cast<Index>(j);
        if (block_active(n, m)) {
          out.block(ii, jj) = block(n, m);
        } else {
          out.clear_block(ii, jj);
        }
      }
    }
    return out;
  }

 private:
  Index agents_ = 0;
  Index state_dim_ = 0;
  std::vector<Index> input_dims_;
  std::vector<Index> col_offsets_;
  Matrix dense_;
  std::vector<char> active_;
};

struct GameConfig {
  std::vector<PowerBudget> budgets;
  std::vector<Matrix> sensor_noise;  // S_z per agent, d_y x d_y
  std::vector<Matrix> sensors;       // C per agent, d_y x d_x
  double tolerance = 1e-6;
  int max_sweeps = 200;

  Index agents() const noexcept { return static_cast<Index>(budgets.size()); }

  /// Same budget, sensor and isotropic noise variance for every agent.
  static GameConfig uniform(Index agents, double budget, const Matrix& sensor,
                            double noise_variance) {
    GameConfig config;
    const auto n = static_cast<std::size_t>(agents);
    config.budgets.assign(n, PowerBudget(budget));
    config.sensors.assign(n, sensor);
    config.sensor_noise.assign(
        n, noise_variance * Matrix::Identity(sensor.rows(), sensor.rows()));
    return config;
  }

  /// Restriction to a subset of agents, in the listed order.
  GameConfig restricted(const std::vector<Index>& agents) const {
    GameConfig out;
    out.tolerance = tolerance;
    out.max_sweeps = max_sweeps;
    for (Index a : agents) {
      const auto i = static_cast<std::size_t>(a);
      out.budgets.push_back(budgets.at(i));
      out.sensor_noise.push_back(sensor_noise.at(i));
      out.sensors.push_back(sensors.at(i));
    }
    return out;
  }
};

struct EmpowermentReport {
  std::vector<Matrix> covariances;
  std::vector<double> empowerment;  // nats
  int sweeps_used = 0;
  bool converged = false;
  double final_residual = 0.0;
};

namespace detail {

inline void validate_game(const SensitivityMatrix& sens, const GameConfig& config) {
  const Index n = sens.agents();
  require(config.agents() == n &&
              static_cast<Index>(config.sensors.size()) == n &&
              static_cast<Index>(config.sensor_noise.size()) == n,
          ErrorCode::kDimensionMismatch,
          "game config must have one budget, sensor and noise per agent (" +
              std::to_string(n) + " agents)");
  require(config.tolerance > 0.0, ErrorCode::kInvalidArgument,
          "tolerance must be positive");
  require(config.max_sweeps >= 1, ErrorCode::kInvalidArgument,
          "max_sweeps must be positive");
  for (Index a = 0; a < n; ++a) {
    const Matrix& c = config.sensors[static_cast<std::size_t>(a)];
    const Matrix& z = config.sensor_noise[static_cast<std::size_t>(a)];
    require(c.cols() == sens.state_dim() && c.rows() >= 1 &&
                c.rows() <= sens.state_dim() && c.allFinite(),
            ErrorCode::kDimensionMismatch,
            "sensor " + std::to_string(a) + " has shape " + shape(c) +
                " but state dimension is " + std::to_string(sens.state_dim()));
    require(z.rows() == c.rows() && z.cols() == c.rows(),
            ErrorCode::kDimensionMismatch,
            "sensor noise " + std::to_string(a) + " has shape " + shape(z));
  }
}

inline void validate_covariances(const SensitivityMatrix& sens,
                                 const std::vector<Matrix>& covs) {
  require(static_cast<Index>(covs.size()) == sens.agents(),
          ErrorCode::kDimensionMismatch, "one covariance per agent is required");
  for (Index m = 0; m < sens.agents(); ++m) {
    const Matrix& s = covs[static_cast<std::size_t>(m)];
    require(s.rows() == sens.input_dim(m) && s.cols() == sens.input_dim(m),
            ErrorCode::kDimensionMismatch,
            "covariance " + std::to_string(m) + " has shape " + shape(s));
  }
}

}  // namespace detail

/// Sensed-output channels of one game, precomputed once: the direct channel
/// C_n F(n,n) and the interference channels C_n F(n,m) for active blocks.
class GameChannels {
 public:
  GameChannels(const SensitivityMatrix& sens, const GameConfig& config)
      : agents_(sens.agents()) {
    detail::validate_game(sens, config);
    const auto n_agents = static_cast<std::size_t>(agents_);
    direct_.resize(n_agents);
    cross_.resize(n_agents);
    for (Index n = 0; n < agents_; ++n) {
      const Matrix& c = config.sensors[static_cast<std::size_t>(n)];
      direct_[static_cast<std::size_t>(n)] = c * sens.block(n, n);
      for (Index m = 0; m < agents_; ++m) {
        if (m == n || !sens.block_active(n, m)) continue;
        Matrix leak = c * sens.block(n, m);
        if (leak.isZero(0.0)) continue;
        cross_[static_cast<std::size_t>(n)].push_back({m, std::move(leak)});
      }
    }
  }

  Index agents() const noexcept { return agents_; }
  const Matrix& direct(Index n) const { return direct_[static_cast<std::size_t>(n)]; }

  Matrix effective_noise(Index n, const std::vector<Matrix>& covs,
                         const GameConfig& config) const {
    Matrix noise = config.sensor_noise[static_cast<std::size_t>(n)];
    for (const auto& [m, leak] : cross_[static_cast<std::size_t>(n)]) {
      noise.noalias() += leak * covs[static_cast<std::size_t>(m)] * leak.transpose();
    }
    return 0.5 * (noise + noise.transpose());
  }

  Matrix best_response(Index n, const std::vector<Matrix>& covs,
                       const GameConfig& config) const {
    const Matrix noise = effective_noise(n, covs, config);
    return waterfill(direct(n), noise, config.budgets[static_cast<std::size_t>(n)]);
  }

  double empowerment(Index n, const Matrix& cov, const Matrix& noise) const {
    const auto llt = factor_noise(noise);
    const Matrix whitened = llt.matrixL().solve(direct(n));
    return detail::capacity_whitened(whitened, cov);
  }

 private:
  struct Leak {
    Index source;
    Matrix channel;
  };
  Index agents_;
  std::vector<Matrix> direct_;
  std::vector<std::vector<Leak>> cross_;
};

/// S_z(n) + sum over m != n of C_n F(n,m) S_m F(n,m)^T C_n^T.
inline Matrix effective_noise(Index agent, const SensitivityMatrix& sens,
                              const std::vector<Matrix>& covariances,
                              const GameConfig& config) {
  detail::validate_covariances(sens, covariances);
  require(agent >= 0 && agent < sens.agents(), ErrorCode::kInvalidArgument,
          "agent index out of range");
  return GameChannels(sens, config).effective_noise(agent, covariances, config);
}

/// Water-filling response of one agent to the others' covariances.
inline Matrix best_response(Index agent, const SensitivityMatrix& sens,
                            const std::vector<Matrix>& covariances,
                            const GameConfig& config) {
  detail::validate_covariances(sens, covariances);
  require(agent >= 0 && agent < sens.agents(), ErrorCode::kInvalidArgument,
          "agent index out of range");
  return GameChannels(sens, config).best_response(agent, covariances, config);
}

/// Capacity of agent's own channel under the interference of the others:
/// 0.5 ln|D S D^T + N| - 0.5 ln|N| with N the effective noise.
inline double empowerment_of(Index agent, const SensitivityMatrix& sens,
                             const std::vector<Matrix>& covariances,
                             const GameConfig& config) {
  detail::validate_covariances(sens, covariances);
  require(agent >= 0 && agent < sens.agents(), ErrorCode::kInvalidArgument,
          "agent index out of range");
  const GameChannels channels(sens, config);
  const Matrix noise = channels.effective_noise(agent, covariances, config);
  return channels.empowerment(
      agent, repair_psd(covariances[static_cast<std::size_t>(agent)]), noise);
}

/// Uniform power over every input coordinate: (P / dim) * I.
inline std::vector<Matrix> uniform_covariances(const SensitivityMatrix& sens,
                                               const GameConfig& config) {
  std::vector<Matrix> covs;
  covs.reserve(static_cast<std::size_t>(sens.agents()));
  for (Index m = 0; m < sens.agents(); ++m) {
    const Index dim = sens.input_dim(m);
    const double p = config.budgets[static_cast<std::size_t>(m)].value();
    covs.push_back((p / static_cast<double>(dim)) * Matrix::Identity(dim, dim));
  }
  return covs;
}

/// Iterative water-filling. Sweeps best responses in agent order until the
/// largest per-agent Frobenius change of a sweep is <= tolerance, or
/// max_sweeps is hit (reported through `converged`, not thrown).
inline EmpowermentReport solve_game(
    const SensitivityMatrix& sens, const GameConfig& config,
    const std::optional<std::vector<Matrix>>& initial = std::nullopt) {
  const GameChannels channels(sens, config);
  const Index n_agents = sens.agents();

  EmpowermentReport report;
  if (initial) {
    detail::validate_covariances(sens, *initial);
    report.covariances.reserve(initial->size());
    for (Index m = 0; m < n_agents; ++m) {
      Matrix s = repair_psd((*initial)[static_cast<std::size_t>(m)]);
      const double budget = config.budgets[static_cast<std::size_t>(m)].value();
      require(s.trace() <= budget + 1e-9, ErrorCode::kInvalidArgument,
              "initial covariance " + std::to_string(m) + " exceeds its budget");
      report.covariances.push_back(std::move(s));
    }
  } else {
    report.covariances = uniform_covariances(sens, config);
  }

  auto& covs = report.covariances;
  for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    double residual = 0.0;
    for (Index n = 0; n < n_agents; ++n) {
      Matrix next = channels.best_response(n, covs, config);
      auto& current = covs[static_cast<std::size_t>(n)];
      residual = std::max(residual, (next - current).norm());
      current = std::move(next);
    }
    report.sweeps_used = sweep;
    report.final_residual = residual;
    if (residual <= config.tolerance) {
      report.converged = true;
      break;
    }
  }

  report.empowerment.resize(static_cast<std::size_t>(n_agents));
  for (Index n = 0; n < n_agents; ++n) {
    const Matrix noise = channels.effective_noise(n, covs, config);
    report.empowerment[static_cast<std::size_t>(n)] =
        channels.empowerment(n, covs[static_cast<std::size_t>(n)], noise);
  }
  return report;
}

}  // namespace mempower

#endif  // MEMPOWER_GAME_HPP_
