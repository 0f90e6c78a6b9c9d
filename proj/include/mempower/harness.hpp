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

// Batch experiments: torque sweeps over the linked pendulums, flock studies,
// and their tables.

#ifndef MEMPOWER_HARNESS_HPP_
#define MEMPOWER_HARNESS_HPP_

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mempower/control.hpp"
#include "mempower/error.hpp"
#include "mempower/flock.hpp"
#include "mempower/io.hpp"
#include "mempower/metrics.hpp"
#include "mempower/pendulum.hpp"

namespace mempower {

/// Game parameters shared by every agent. Each agent's power budget is the
/// square of its action bound.
struct GameSettings {
  double noise_variance = 1e-2;
  double tolerance = 1e-6;
  int max_sweeps = 200;
};

inline GameConfig pendulum_game(const PendulumConfig& config, const GameSettings& s) {
  GameConfig game =
      GameConfig::uniform(config.agents(), 0.0, selector_sensor(2, 0), s.noise_variance);
  for (std::size_t n = 0; n < game.budgets.size(); ++n) {
    game.budgets[n] = PowerBudget(config.torque_bounds[n] * config.torque_bounds[n]);
  }
  game.tolerance = s.tolerance;
  game.max_sweeps = s.max_sweeps;
  return game;
}

inline GameConfig flock_game(const FlockConfig& config, const GameSettings& s) {
  GameConfig game = GameConfig::uniform(config.agents, config.accel_bound * config.accel_bound,
                                        selector_sensor(FlockEnvironment::kStateDim,
                                                        FlockEnvironment::kHeading),
                                        s.noise_variance);
  game.tolerance = s.tolerance;
  game.max_sweeps = s.max_sweeps;
  return game;
}

inline Json to_json(const GameSettings& s) {
  return Json{{"noise_variance", s.noise_variance},
              {"tolerance", s.tolerance},
              {"max_sweeps", s.max_sweeps}};
}

inline GameSettings game_settings_from_json(const Json& j) {
  detail::check_keys(j, {"noise_variance", "tolerance", "max_sweeps"}, "game settings");
  GameSettings s;
  detail::read_key(j, "noise_variance", s.noise_variance);
  detail::read_key(j, "tolerance", s.tolerance);
  detail::read_key(j, "max_sweeps", s.max_sweeps);
  require(s.noise_variance > 0.0 && s.tolerance > 0.0 && s.max_sweeps >= 1,
          ErrorCode::kInvalidArgument,
          "noise variance and tolerance must be positive, max_sweeps >= 1");
  return s;
}

/// Runs `count` independent jobs on up to `threads` workers (0 = hardware
/// concurrency). Job i writes only its own output slot, so results do not
/// depend on scheduling.
template <class Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
}

// ---- pendulum sweeps ----

struct SweepSpec {
  std::vector<std::pair<double, double>> cells;  // (tau_0, tau_1)
  std::vector<Policy> policies{Policy::egoistic(), Policy::egoistic()};
  int candidates = 9;
  Index steps = 800;
  int repetitions = 1;
  std::uint64_t seed = 1;
  double jitter = 0.0;  // initial angles uniform in [-jitter, jitter] per repetition

  /// Row-major grid: tau_0 varies slowest.
  static SweepSpec grid(const std::vector<double>& tau0, const std::vector<double>& tau1) {
    SweepSpec s;
    for (double a : tau0) {
      for (double b : tau1) s.cells.emplace_back(a, b);
    }
    return s;
  }

  void validate() const {
    require(!cells.empty(), ErrorCode::kEmptyInput, "sweep grid is empty");
    require(repetitions >= 1, ErrorCode::kInvalidArgument, "repetitions must be >= 1");
    require(steps >= 1, ErrorCode::kInvalidArgument, "steps must be >= 1");
    require(jitter >= 0.0, ErrorCode::kInvalidArgument, "jitter must be nonnegative");
    require(policies.size() == 2, ErrorCode::kDimensionMismatch,
            "pendulum sweeps need one policy per pendulum");
    PolicyAssignment{policies, candidates}.validate(2);
  }
};

struct SweepCell {
  double tau0 = 0.0;
  double tau1 = 0.0;
  OutcomeLabel outcome = OutcomeLabel::kNeitherUp;
  std::array<int, 4> votes{};  // indexed by OutcomeLabel
  std::array<double, 2> final_empowerment{};
  std::array<double, 2> mean_empowerment{};
  int repetitions = 0;
  int failures = 0;
  std::string error;
};

/// Strict plurality over repetitions; ties resolve to NeitherUp.
inline OutcomeLabel majority_outcome(const std::array<int, 4>& votes) {
  const auto top = std::max_element(votes.begin(), votes.end());
  if (*top == 0 || std::count(votes.begin(), votes.end(), *top) > 1) {
    return OutcomeLabel::kNeitherUp;
  }
  return static_cast<OutcomeLabel>(top - votes.begin());
}

/// Initial state for (cell, repetition): hanging at rest, angles jittered
/// from a stream keyed by (seed, cell, repetition).
inline JointState sweep_initial_state(const PendulumEnvironment& env, const SweepSpec& spec,
                                      std::size_t cell, int repetition) {
  JointState x = env.hanging();
  if (spec.jitter == 0.0) return x;
  std::mt19937_64 rng(detail::splitmix64(
      detail::splitmix64(spec.seed ^ (cell * 0x9e3779b97f4a7c15ULL)) ^
      static_cast<std::uint64_t>(repetition)));
  std::uniform_real_distribution<double> u(-spec.jitter, spec.jitter);
  for (Index n = 0; n < env.agent_count(); ++n) x.values(2 * n) = u(rng);
  return x;
}

struct EpisodeSummary {
  OutcomeLabel outcome = OutcomeLabel::kNeitherUp;
  std::array<double, 2> final_empowerment{};
  std::array<double, 2> mean_empowerment{};
  bool failed = false;
  std::string error;
};

inline EpisodeSummary summarize_pendulum_episode(const PendulumConfig& config,
                                                 const EpisodeRecord& rec) {
  EpisodeSummary s;
  if (rec.aborted || rec.steps.empty()) {
    s.failed = true;
    s.error = rec.error.empty() ? "episode recorded no steps" : rec.error;
    return s;
  }
  s.outcome = classify_outcome(config, rec.final_state);
  const auto mean = rec.mean_empowerment();
  for (std::size_t n = 0; n < mean.size() && n < 2; ++n) {
    s.mean_empowerment[n] = mean[n];
    s.final_empowerment[n] = rec.steps.back().empowerment[n];
  }
  return s;
}

/// Runs every (cell, repetition) episode. Cell (a, b) sets the torque
/// bounds and budgets to (a, b); failures are recorded and the sweep goes on.
inline std::vector<SweepCell> run_sweep(const SweepSpec& spec, const PendulumConfig& base,
                                        const GameSettings& settings,
                                        const ControlOptions& opts, unsigned threads = 0) {
  spec.validate();
  require(base.agents() == 2, ErrorCode::kInvalidArgument,
          "sweeps need the two-pendulum configuration");
  const std::size_t reps = static_cast<std::size_t>(spec.repetitions);
  std::vector<EpisodeSummary> results(spec.cells.size() * reps);

  parallel_for(results.size(), threads, [&](std::size_t job) {
    const std::size_t cell = job / reps;
    const int rep = static_cast<int>(job % reps);
    EpisodeSummary& out = results[job];
    try {
      PendulumConfig config = base;
      config.torque_bounds = {spec.cells[cell].first, spec.cells[cell].second};
      const PendulumEnvironment env(config);
      const PolicyAssignment assignment{spec.policies, spec.candidates};
      const EpisodeRecord rec =
          run_episode(env, sweep_initial_state(env, spec, cell, rep), assignment, spec.steps,
                      pendulum_game(config, settings), opts);
      out = summarize_pendulum_episode(config, rec);
    } catch (const Error& e) {
      out.failed = true;
      out.error = e.what();
    }
  });

  std::vector<SweepCell> cells(spec.cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    SweepCell& cell = cells[c];
    cell.tau0 = spec.cells[c].first;
    cell.tau1 = spec.cells[c].second;
    int ok = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const EpisodeSummary& s = results[c * reps + r];
      ++cell.repetitions;
      if (s.failed) {
        ++cell.failures;
        if (cell.error.empty()) cell.error = s.error;
        continue;
      }
      ++ok;
      ++cell.votes[static_cast<std::size_t>(s.outcome)];
      for (std::size_t n = 0; n < 2; ++n) {
        cell.final_empowerment[n] += s.final_empowerment[n];
        cell.mean_empowerment[n] += s.mean_empowerment[n];
      }
    }
    if (ok > 0) {
      for (std::size_t n = 0; n < 2; ++n) {
        cell.final_empowerment[n] /= ok;
        cell.mean_empowerment[n] /= ok;
      }
    }
    cell.outcome = majority_outcome(cell.votes);
  }
  return cells;
}

/// Cells (in sweep order) whose label has the given pendulum up.
inline std::vector<std::pair<double, double>> cells_with_up(
    const std::vector<SweepCell>& cells, Index pendulum) {
  std::vector<std::pair<double, double>> out;
  for (const SweepCell& c : cells) {
    const bool both = c.outcome == OutcomeLabel::kBothUp;
    const bool up = pendulum == 0 ? (both || c.outcome == OutcomeLabel::kLeftUp)
                                  : (both || c.outcome == OutcomeLabel::kRightUp);
    if (up) out.emplace_back(c.tau0, c.tau1);
  }
  return out;
}

inline CsvTable heatmap_table(const std::vector<SweepCell>& cells) {
  require(!cells.empty(), ErrorCode::kEmptyInput, "heatmap has no cells");
  CsvTable t;
  t.header = {"tau0",
              "tau1",
              "outcome",
              "final_empowerment0",
              "final_empowerment1",
              "mean_empowerment0",
              "mean_empowerment1",
              "repetitions",
              "failures",
              "votes_left_up",
              "votes_right_up",
              "votes_both_up",
              "votes_neither_up"};
  for (const SweepCell& c : cells) {
    t.rows.push_back({format_double(c.tau0), format_double(c.tau1),
                      std::string(outcome_name(c.outcome)),
                      format_double(c.final_empowerment[0]),
                      format_double(c.final_empowerment[1]),
                      format_double(c.mean_empowerment[0]),
                      format_double(c.mean_empowerment[1]), std::to_string(c.repetitions),
                      std::to_string(c.failures), std::to_string(c.votes[0]),
                      std::to_string(c.votes[1]), std::to_string(c.votes[2]),
                      std::to_string(c.votes[3])});
  }
  return t;
}

/// Inverse of heatmap_table (error strings are not part of the table).
inline std::vector<SweepCell> heatmap_from_table(const CsvTable& t) {
  auto col = [&t](std::string_view name) { return t.column(name); };
  auto as_int = [](const std::string& s) { return static_cast<int>(parse_double(s)); };
  std::vector<SweepCell> cells;
  for (const auto& r : t.rows) {
    SweepCell c;
    c.tau0 = parse_double(r[col("tau0")]);
    c.tau1 = parse_double(r[col("tau1")]);
    c.outcome = parse_outcome(r[col("outcome")]);
    c.final_empowerment = {parse_double(r[col("final_empowerment0")]),
                           parse_double(r[col("final_empowerment1")])};
    c.mean_empowerment = {parse_double(r[col("mean_empowerment0")]),
                          parse_double(r[col("mean_empowerment1")])};
    c.repetitions = as_int(r[col("repetitions")]);
    c.failures = as_int(r[col("failures")]);
    c.votes = {as_int(r[col("votes_left_up")]), as_int(r[col("votes_right_up")]),
               as_int(r[col("votes_both_up")]), as_int(r[col("votes_neither_up")])};
    cells.push_back(std::move(c));
  }
  return cells;
}

// ---- self-righting threshold ----

struct ThresholdSearch {
  double threshold = 0.0;  // midpoint of the final bracket
  double lower = 0.0;      // largest bound seen failing
  double upper = 0.0;      // smallest bound seen swinging up
  int episodes = 0;
};

/// Whether a lone pendulum (agent 0's constants from `base`) with torque
/// bound tau, egoistic, ends an episode from rest within the upright band.
inline bool single_pendulum_rises(const PendulumConfig& base, double tau,
                                  const GameSettings& settings, const ControlOptions& opts,
                                  int candidates, Index steps) {
  PendulumConfig single = base;
  single.masses = {base.masses.at(0)};
  single.lengths = {base.lengths.at(0)};
  single.torque_bounds = {tau};
  const PendulumEnvironment env(single);
  const EpisodeRecord rec =
      run_episode(env, env.hanging(), PolicyAssignment::all(1, Policy::egoistic(), candidates),
                  steps, pendulum_game(single, settings), opts);
  require(!rec.aborted, ErrorCode::kNonFiniteState, "threshold episode aborted: " + rec.error);
  return classify_outcome(single, rec.final_state) == OutcomeLabel::kLeftUp;
}

/// Bisection on the torque bound for the smallest value that swings a lone
/// pendulum up. Needs lower to fail and upper to succeed.
inline ThresholdSearch self_righting_threshold(const PendulumConfig& base,
                                               const GameSettings& settings,
                                               const ControlOptions& opts, int candidates,
                                               Index steps, double lower, double upper,
                                               int iterations) {
  require(0.0 <= lower && lower < upper, ErrorCode::kInvalidArgument,
          "threshold bracket must satisfy 0 <= lower < upper");
  ThresholdSearch r{0.0, lower, upper, 0};
  auto rises = [&](double tau) {
    ++r.episodes;
    return single_pendulum_rises(base, tau, settings, opts, candidates, steps);
  };
  require(!rises(lower), ErrorCode::kInvalidArgument,
          "pendulum already rises at the lower bracket " + format_double(lower));
  require(rises(upper), ErrorCode::kInvalidArgument,
          "pendulum does not rise at the upper bracket " + format_double(upper));
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (r.lower + r.upper);
    (rises(mid) ? r.upper : r.lower) = mid;
  }
  r.threshold = 0.5 * (r.lower + r.upper);
  return r;
}

// ---- flock studies ----

struct MetricSeries {
  std::vector<double> time;
  std::vector<double> mean_empowerment;
  std::vector<double> order_parameter;

  std::size_t size() const noexcept { return time.size(); }
};

struct FlockSnapshot {
  Index step = 0;
  JointState state;
  HeadingHistogram histogram;  // relative to the flock mean heading
};

struct FlockStudyOptions {
  std::vector<Index> snapshot_steps;  // values equal to T mean the final state
  int histogram_bins = 36;
};

struct FlockStudy {
  EpisodeRecord episode;
  MetricSeries series;
  std::vector<FlockSnapshot> snapshots;
  double terminal_order = 0.0;
  double time_mean_empowerment = 0.0;
  BimodalityResult bimodality;
};

inline double time_mean(const std::vector<double>& v) {
  require(!v.empty(), ErrorCode::kEmptyInput, "mean of an empty series");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// One episode from the configured random initial state, with per-step
/// order parameter and agent-mean empowerment. Partial output is kept when
/// the episode aborts; the error is then in episode.error.
inline FlockStudy run_flock_study(const FlockConfig& config, const PolicyAssignment& assignment,
                                  Index steps, const GameSettings& settings,
                                  const ControlOptions& opts,
                                  const FlockStudyOptions& study = {}) {
  const FlockEnvironment env(config);
  FlockStudy out;
  out.episode =
      run_episode(env, env.random_state(), assignment, steps, flock_game(config, settings), opts);
  for (const StepRecord& s : out.episode.steps) {
    const auto h = env.headings(s.state);
    out.series.time.push_back(s.time);
    out.series.order_parameter.push_back(order_parameter(h));
    out.series.mean_empowerment.push_back(time_mean(s.empowerment));
  }
  const auto final_headings = env.headings(out.episode.final_state);
  out.terminal_order = order_parameter(final_headings);
  out.bimodality = two_cluster_test(final_headings);
  if (!out.series.mean_empowerment.empty()) {
    out.time_mean_empowerment = time_mean(out.series.mean_empowerment);
  }
  const auto recorded = static_cast<Index>(out.episode.steps.size());
  for (Index k : study.snapshot_steps) {
    const JointState* x = nullptr;
    if (k >= 0 && k < recorded) {
      x = &out.episode.steps[static_cast<std::size_t>(k)].state;
    } else if (k == recorded && !out.episode.aborted) {
      x = &out.episode.final_state;
    }
    if (x == nullptr) continue;
    out.snapshots.push_back(
        {k, *x, heading_histogram(env.headings(*x), true, study.histogram_bins)});
  }
  return out;
}

inline CsvTable series_table(const MetricSeries& s) {
  require(s.size() > 0, ErrorCode::kEmptyInput, "metric series is empty");
  require(s.mean_empowerment.size() == s.size() && s.order_parameter.size() == s.size(),
          ErrorCode::kDimensionMismatch, "metric series columns differ in length");
  CsvTable t;
  t.header = {"step", "time", "mean_empowerment", "order_parameter"};
  for (std::size_t k = 0; k < s.size(); ++k) {
    t.rows.push_back({std::to_string(k), format_double(s.time[k]),
                      format_double(s.mean_empowerment[k]),
                      format_double(s.order_parameter[k])});
  }
  return t;
}

inline CsvTable snapshot_table(const std::vector<FlockSnapshot>& snaps) {
  CsvTable t;
  t.header = {"step", "agent", "x", "y", "heading"};
  for (const auto& s : snaps) {
    for (Index n = 0; n < s.state.agents; ++n) {
      const auto a = s.state.agent(n);
      t.rows.push_back({std::to_string(s.step), std::to_string(n),
                        format_double(a(FlockEnvironment::kX)),
                        format_double(a(FlockEnvironment::kY)),
                        format_double(wrap_angle(a(FlockEnvironment::kHeading)))});
    }
  }
  return t;
}

inline CsvTable histogram_table(const std::vector<FlockSnapshot>& snaps) {
  CsvTable t;
  t.header = {"step", "bin", "relative_heading", "count"};
  for (const auto& s : snaps) {
    for (std::size_t b = 0; b < s.histogram.bins(); ++b) {
      t.rows.push_back({std::to_string(s.step), std::to_string(b),
                        format_double(s.histogram.center(b)),
                        std::to_string(s.histogram.counts[b])});
    }
  }
  return t;
}

// ---- reports ----

/// Files of one run. Data files are deterministic; wall time lives only in
/// the metadata under "wall_time_s".
struct Report {
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
  Json metadata = Json::object();
};

inline Json run_metadata(std::string_view command, const Json& config, std::uint64_t seed) {
  return Json{{"tool", "mempower"},
              {"command", std::string(command)},
              {"config_hash", hex64(fnv1a(config.dump()))},
              {"seed", seed},
              {"config", config}};
}

/// Writes every file into `dir` plus metadata.json. All files are attempted;
/// failures are reported together afterwards.
inline void emit_report(const std::filesystem::path& dir, const Report& report) {
  require(!report.files.empty(), ErrorCode::kEmptyInput, "report has no files");
  std::string failures;
  auto attempt = [&](const std::string& name, const std::string& text) {
    try {
      write_file(dir / name, text);
    } catch (const Error& e) {
      failures += (failures.empty() ? "" : "; ") + std::string(e.what());
    }
  };
  for (const auto& [name, text] : report.files) attempt(name, text);
  attempt("metadata.json", report.metadata.dump(2) + "\n");
  require(failures.empty(), ErrorCode::kIo, failures);
}

}  // namespace mempower

#endif  // MEMPOWER_HARNESS_HPP_
