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

// Empowerment-maximizing control.
//
// Each controlled agent picks, from a grid of candidate actions, the one whose
// next state gives the highest empowerment to the agent it works for (itself
// when egoistic, a designated other agent when altruistic). While an agent
// searches, all other agents' actions are held at zero.

#ifndef MEMPOWER_CONTROL_HPP_
#define MEMPOWER_CONTROL_HPP_

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mempower/dynamics.hpp"
#include "mempower/error.hpp"
#include "mempower/game.hpp"
#include "mempower/pendulum.hpp"

namespace mempower {

struct Policy {
  enum class Kind { kEgoistic, kAltruistic, kPassive };

  Kind kind = Kind::kPassive;
  Index target = -1;  // only for kAltruistic

  static Policy egoistic() { return {Kind::kEgoistic, -1}; }
  static Policy altruistic(Index target) { return {Kind::kAltruistic, target}; }
  static Policy passive() { return {Kind::kPassive, -1}; }

  bool operator==(const Policy&) const = default;
};

/// Parses "egoistic", "passive" or "altruistic:<target>".
inline Policy parse_policy(const std::string& text) {
  if (text == "egoistic") return Policy::egoistic();
  if (text == "passive") return Policy::passive();
  const std::string prefix = "altruistic:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const long target = std::stol(text.substr(prefix.size()), &used);
      if (used == text.size() - prefix.size() && target >= 0) {
        return Policy::altruistic(static_cast<Index>(target));
      }
    } catch (const std::exception&) {
    }
  }
  fail(ErrorCode::kParse, "unknown policy '" + text +
                              "' (expected egoistic, passive or altruistic:N)");
}

inline std::string policy_name(const Policy& p) {
  switch (p.kind) {
    case Policy::Kind::kEgoistic: return "egoistic";
    case Policy::Kind::kPassive: return "passive";
    case Policy::Kind::kAltruistic: return "altruistic:" + std::to_string(p.target);
  }
  return "passive";
}

struct PolicyAssignment {
  std::vector<Policy> policies;
  int candidates = 9;  // grid points per action coordinate

  static PolicyAssignment all(Index agents, Policy policy, int candidates) {
    return {std::vector<Policy>(static_cast<std::size_t>(agents), policy), candidates};
  }

  const Policy& of(Index agent) const {
    return policies.at(static_cast<std::size_t>(agent));
  }

  void validate(Index agents) const {
    require(static_cast<Index>(policies.size()) == agents,
            ErrorCode::kDimensionMismatch, "one policy per agent is required");
    require(candidates >= 2, ErrorCode::kInvalidArgument,
            "candidate grid needs at least 2 points");
    for (Index n = 0; n < agents; ++n) {
      const Policy& p = of(n);
      if (p.kind == Policy::Kind::kAltruistic) {
        require(p.target >= 0 && p.target < agents && p.target != n,
                ErrorCode::kInvalidArgument,
                "altruistic agent " + std::to_string(n) +
                    " needs a target other than itself");
      }
    }
  }
};

struct ControlOptions {
  Index horizon = 10;
  LinearizeOptions linearize;
  // Evaluate candidates with the other agents' covariances taken from the
  // current step's game instead of re-solving the game at every candidate.
  bool reuse_interference = false;
  // When set (and the environment exposes neighbor sets), candidate
  // evaluation and the logged game only couple agents within this radius.
  std::optional<double> local_radius;
};

/// M equally spaced values over [-bound, bound], endpoints included.
inline std::vector<double> candidate_actions(double bound, int count) {
  require(count >= 2, ErrorCode::kInvalidArgument, "candidate grid needs M >= 2");
  require(bound >= 0.0, ErrorCode::kInvalidArgument, "bound must be nonnegative");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        bound * (-1.0 + 2.0 * static_cast<double>(i) / (count - 1));
  }
  if (count % 2 == 1) out[static_cast<std::size_t>(count / 2)] = 0.0;
  return out;
}

template <class E>
concept HasNeighborSets = requires(const E& env, const JointState& x, double r) {
  { env.neighbor_sets(x, r) } -> std::convertible_to<std::vector<std::vector<Index>>>;
};

/// Full-game reports already solved during one control step, keyed by the
/// joint candidate action. Candidates shared between agents (the all-zero
/// action) are solved once.
struct CandidateMemo {
  std::vector<std::pair<JointAction, std::vector<double>>> entries;

  const std::vector<double>* find(const JointAction& u) const {
    for (const auto& [key, value] : entries) {
      if (key == u) return &value;
    }
    return nullptr;
  }
};

struct ActionChoice {
  Vector action;
  double value = 0.0;  // empowerment of the beneficiary at the chosen candidate
  bool flagged = false;
};

namespace detail {

// Whether candidate a beats the incumbent b on a tie: smaller norm, then the
// lexicographically more negative vector.
inline bool preferred_on_tie(const Vector& a, const Vector& b) {
  const double na = a.squaredNorm();
  const double nb = b.squaredNorm();
  if (na != nb) return na < nb;
  for (Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return false;
}

inline std::vector<Vector> candidate_grid(double bound, int count, Index dims) {
  const auto axis = candidate_actions(bound, count);
  std::vector<Vector> grid{Vector::Zero(dims)};
  for (Index d = 0; d < dims; ++d) {
    std::vector<Vector> next;
    for (const Vector& partial : grid) {
      for (double a : axis) {
        Vector v = partial;
        v(d) = a;
        next.push_back(v);
      }
    }
    grid = std::move(next);
  }
  return grid;
}

inline Index beneficiary(Index agent, const Policy& policy) {
  return policy.kind == Policy::Kind::kAltruistic ? policy.target : agent;
}

// Empowerment of `target` at state x, solving either the full game or the
// game among target's neighbors.
template <Environment E>
double empowerment_at(const E& env, const JointState& x, Index target,
                      const GameConfig& game, const ControlOptions& opts,
                      const EmpowermentReport* interference) {
  std::vector<Index> subset;
  if constexpr (HasNeighborSets<E>) {
    if (opts.local_radius) {
      subset = env.neighbor_sets(x, *opts.local_radius)[static_cast<std::size_t>(target)];
    }
  }
  if (subset.empty()) {
    subset.resize(static_cast<std::size_t>(env.agent_count()));
    for (Index i = 0; i < env.agent_count(); ++i) subset[static_cast<std::size_t>(i)] = i;
  }
  Index local_target = 0;
  while (subset[static_cast<std::size_t>(local_target)] != target) ++local_target;

  const SensitivityMatrix sens = sensitivity_subset(
      env, x, opts.horizon, std::span<const Index>(subset), opts.linearize);
  const GameConfig local_game =
      static_cast<Index>(subset.size()) == env.agent_count() ? game
                                                             : game.restricted(subset);
  if (interference == nullptr) {
    return solve_game(sens, local_game).empowerment[static_cast<std::size_t>(local_target)];
  }
  std::vector<Matrix> covs;
  covs.reserve(subset.size());
  for (Index a : subset) covs.push_back(interference->covariances[static_cast<std::size_t>(a)]);
  const GameChannels channels(sens, local_game);
  covs[static_cast<std::size_t>(local_target)] =
      channels.best_response(local_target, covs, local_game);
  const Matrix noise = channels.effective_noise(local_target, covs, local_game);
  return channels.empowerment(local_target, covs[static_cast<std::size_t>(local_target)],
                              noise);
}

}  // namespace detail

/// Candidate-grid argmax of the beneficiary's empowerment at f(x, u), with
/// every other agent's action at zero. Candidates whose evaluation fails are
/// skipped; if all fail the zero action is returned and flagged.
template <Environment E>
ActionChoice select_action(const E& env, const JointState& x, Index agent,
                           const PolicyAssignment& assignment, const GameConfig& game,
                           const ControlOptions& opts,
                           const EmpowermentReport* step_report = nullptr,
                           CandidateMemo* memo = nullptr) {
  assignment.validate(env.agent_count());
  const Policy& policy = assignment.of(agent);
  require(policy.kind != Policy::Kind::kPassive, ErrorCode::kInvalidArgument,
          "select_action called for a passive agent");
  const Index du = env.action_dim();
  const Index target = detail::beneficiary(agent, policy);
  const EmpowermentReport* interference = opts.reuse_interference ? step_report : nullptr;
  if (interference != nullptr || opts.local_radius) memo = nullptr;

  ActionChoice best{Vector::Zero(du), 0.0, true};
  bool have = false;
  for (const Vector& candidate :
       detail::candidate_grid(env.action_bound(agent), assignment.candidates, du)) {
    double value = 0.0;
    try {
      JointAction u = JointAction::Zero(env.agent_count() * du);
      u.segment(agent * du, du) = candidate;
      const std::vector<double>* known = memo ? memo->find(u) : nullptr;
      if (known != nullptr) {
        value = (*known)[static_cast<std::size_t>(target)];
      } else if (memo != nullptr) {
        const JointState next = step(env, x, u);
        const EmpowermentReport r = solve_game(
            sensitivity(env, next, opts.horizon, opts.linearize), game);
        memo->entries.emplace_back(u, r.empowerment);
        value = r.empowerment[static_cast<std::size_t>(target)];
      } else {
        const JointState next = step(env, x, u);
        value = detail::empowerment_at(env, next, target, game, opts, interference);
      }
    } catch (const Error&) {
      continue;
    }
    if (!std::isfinite(value)) continue;
    const double tol = 1e-12 * std::max(1.0, std::abs(best.value));
    const bool better = !have || value > best.value + tol ||
                        (std::abs(value - best.value) <= tol &&
                         detail::preferred_on_tie(candidate, best.action));
    if (better) {
      best = {candidate, value, false};
      have = true;
    }
  }
  return best;
}

struct StepRecord {
  double time = 0.0;
  JointState state;  // state at which the step's action was chosen
  JointAction action;
  std::vector<double> empowerment;
  int sweeps = 0;
  bool converged = false;
  double residual = 0.0;
  bool flagged = false;
};

struct EpisodeRecord {
  std::vector<StepRecord> steps;
  JointState final_state;
  std::optional<OutcomeLabel> outcome;
  bool aborted = false;
  std::string error;

  /// Mean over steps of each agent's logged empowerment.
  std::vector<double> mean_empowerment() const {
    if (steps.empty()) return {};
    std::vector<double> mean(steps.front().empowerment.size(), 0.0);
    for (const auto& s : steps) {
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += s.empowerment[i];
    }
    for (double& m : mean) m /= static_cast<double>(steps.size());
    return mean;
  }
};

/// Game at state x: the full sensitivity, sparsified to neighborhoods when a
/// local radius is configured.
template <Environment E>
EmpowermentReport evaluate_state(const E& env, const JointState& x,
                                 const GameConfig& game, const ControlOptions& opts) {
  SensitivityMatrix sens = sensitivity(env, x, opts.horizon, opts.linearize);
  if constexpr (HasNeighborSets<E>) {
    if (opts.local_radius) sens = sparsify(sens, env.neighbor_sets(x, *opts.local_radius));
  }
  return solve_game(sens, game);
}

/// Online control loop: at every step linearize and solve the game (logged),
/// let every non-passive agent choose its action, then step all agents
/// jointly. A non-finite state aborts the episode, keeping the partial record.
template <Environment E>
EpisodeRecord run_episode(const E& env, const JointState& x0,
                          const PolicyAssignment& assignment, Index steps,
                          const GameConfig& game, const ControlOptions& opts) {
  require(steps >= 1, ErrorCode::kInvalidArgument, "episode needs at least one step");
  assignment.validate(env.agent_count());
  const Index du = env.action_dim();

  EpisodeRecord record;
  record.steps.reserve(static_cast<std::size_t>(steps));
  JointState x = x0;
  try {
    for (Index k = 0; k < steps; ++k) {
      StepRecord rec;
      rec.time = static_cast<double>(k) * env.time_step();
      rec.state = x;
      const EmpowermentReport report = evaluate_state(env, x, game, opts);
      rec.empowerment = report.empowerment;
      rec.sweeps = report.sweeps_used;
      rec.converged = report.converged;
      rec.residual = report.final_residual;

      rec.action = JointAction::Zero(env.agent_count() * du);
      CandidateMemo memo;
      for (Index n = 0; n < env.agent_count(); ++n) {
        if (assignment.of(n).kind == Policy::Kind::kPassive) continue;
        const ActionChoice choice =
            select_action(env, x, n, assignment, game, opts, &report, &memo);
        rec.action.segment(n * du, du) = choice.action;
        rec.flagged = rec.flagged || choice.flagged;
      }
      x = step(env, x, rec.action);
      record.steps.push_back(std::move(rec));
    }
  } catch (const Error& e) {
    record.aborted = true;
    record.error = e.what();
  }
  record.final_state = x;
  return record;
}

}  // namespace mempower

#endif  // MEMPOWER_CONTROL_HPP_
