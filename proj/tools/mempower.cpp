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

// mempower command line: pendulum episodes, torque sweeps, flock studies and
// standalone iterative water-filling on a channel file.
//
// Settings come from built-in defaults, then --config (JSON), then flags.
// On failure one JSON error record is written to stderr and the exit code is
// nonzero (1 for runtime errors, 2 for usage errors).

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mempower/mempower.hpp"

namespace {

using namespace mempower;

struct Flags {
  std::string config;
  std::vector<std::string> policy;
  std::optional<Index> horizon;
  std::optional<Index> steps;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> sparsify;
  std::optional<int> candidates;
  std::optional<unsigned> threads;
  std::vector<double> torques;
  std::string channel_file;
};

struct Settings {
  PendulumConfig pendulum;
  FlockConfig flock;
  GameSettings game;
  Index horizon = 0;
  int candidates = 0;
  Index steps = 0;
  bool sparsify = true;
  bool reuse_interference = false;
  double step_scale = LinearizeOptions{}.step_scale;
  std::vector<Policy> policies;
  // sweep
  std::vector<double> torques0;
  std::vector<double> torques1;
  int repetitions = 1;
  double jitter = 0.0;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  // flock study
  std::vector<Index> snapshot_steps;
  int histogram_bins = 36;

  ControlOptions control(bool flock) const {
    ControlOptions o;
    o.horizon = horizon;
    o.linearize.step_scale = step_scale;
    o.reuse_interference = reuse_interference;
    if (flock && sparsify) o.local_radius = this->flock.radius;
    return o;
  }
};

std::vector<Policy> parse_policies(const std::vector<std::string>& items) {
  std::vector<Policy> out;
  for (const auto& item : items) {
    std::size_t start = 0;
    while (true) {
      const auto comma = item.find(',', start);
      out.push_back(parse_policy(item.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

Json settings_json(const Settings& s, std::string_view command) {
  Json policies = Json::array();
  for (const Policy& p : s.policies) policies.push_back(policy_name(p));
  Json j{{"command", std::string(command)}};
  if (command == "flock") {
    j["flock"] = to_json(s.flock);
  } else if (command != "channel") {
    j["pendulum"] = to_json(s.pendulum);
  }
  j["game"] = to_json(s.game);
  j["control"] = Json{{"horizon", s.horizon},
                      {"candidates", s.candidates},
                      {"steps", s.steps},
                      {"policy", policies},
                      {"reuse_interference", s.reuse_interference},
                      {"step_scale", s.step_scale},
                      {"sparsify", s.sparsify}};
  if (command == "sweep") {
    j["sweep"] = Json{{"torques0", s.torques0},   {"torques1", s.torques1},
                      {"repetitions", s.repetitions}, {"jitter", s.jitter},
                      {"seed", s.seed}};
  }
  if (command == "flock") {
    j["study"] = Json{{"snapshot_steps", s.snapshot_steps},
                      {"histogram_bins", s.histogram_bins}};
  }
  return j;
}

Settings load_settings(const Flags& f, std::string_view command) {
  Settings s;
  const bool flock = command == "flock";
  s.horizon = flock ? 10 : 130;
  s.candidates = flock ? 5 : 9;
  s.steps = flock ? 2000 : 800;
  s.torques0 = s.torques1 = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25};

  std::vector<std::string> policy_text;
  if (!f.config.empty()) {
    const Json j = parse_json(read_file(f.config), "config '" + f.config + "'");
    detail::check_keys(j, {"pendulum", "flock", "game", "control", "sweep", "study"},
                       "config");
    if (j.contains("pendulum")) s.pendulum = pendulum_config_from_json(j["pendulum"]);
    if (j.contains("flock")) s.flock = flock_config_from_json(j["flock"]);
    if (j.contains("game")) s.game = game_settings_from_json(j["game"]);
    if (j.contains("control")) {
      const Json& c = j["control"];
      detail::check_keys(c,
                         {"horizon", "candidates", "steps", "policy", "reuse_interference",
                          "step_scale", "sparsify"},
                         "control");
      detail::read_key(c, "horizon", s.horizon);
      detail::read_key(c, "candidates", s.candidates);
      detail::read_key(c, "steps", s.steps);
      detail::read_key(c, "policy", policy_text);
      detail::read_key(c, "reuse_interference", s.reuse_interference);
      detail::read_key(c, "step_scale", s.step_scale);
      detail::read_key(c, "sparsify", s.sparsify);
    }
    if (j.contains("sweep")) {
      const Json& w = j["sweep"];
      detail::check_keys(w, {"torques", "torques0", "torques1", "repetitions", "jitter",
                             "seed", "threads"},
                         "sweep");
      if (w.contains("torques")) {
        detail::read_key(w, "torques", s.torques0);
        s.torques1 = s.torques0;
      }
      detail::read_key(w, "torques0", s.torques0);
      detail::read_key(w, "torques1", s.torques1);
      detail::read_key(w, "repetitions", s.repetitions);
      detail::read_key(w, "jitter", s.jitter);
      detail::read_key(w, "seed", s.seed);
      detail::read_key(w, "threads", s.threads);
    }
    if (j.contains("study")) {
      const Json& st = j["study"];
      detail::check_keys(st, {"snapshot_steps", "histogram_bins"}, "study");
      detail::read_key(st, "snapshot_steps", s.snapshot_steps);
      detail::read_key(st, "histogram_bins", s.histogram_bins);
    }
  }

  if (f.horizon) s.horizon = *f.horizon;
  if (f.steps) s.steps = *f.steps;
  if (f.candidates) s.candidates = *f.candidates;
  if (f.threads) s.threads = *f.threads;
  if (f.sparsify) s.sparsify = *f.sparsify == "on";
  if (f.seed) {
    s.seed = *f.seed;
    s.flock.seed = *f.seed;
  }
  if (!f.torques.empty()) {
    if (command == "sweep") {
      s.torques0 = s.torques1 = f.torques;
    } else {
      s.pendulum.torque_bounds = f.torques;
    }
  }
  if (!f.policy.empty()) policy_text = f.policy;

  const Index agents = flock ? s.flock.agents : s.pendulum.agents();
  s.policies = parse_policies(policy_text);
  if (s.policies.empty()) {
    s.policies.assign(static_cast<std::size_t>(agents), Policy::egoistic());
  } else if (s.policies.size() == 1 && agents > 1) {
    s.policies.assign(static_cast<std::size_t>(agents), s.policies.front());
  }
  require(s.horizon >= 1 && s.steps >= 1, ErrorCode::kInvalidArgument,
          "horizon and steps must be >= 1");
  if (s.snapshot_steps.empty()) s.snapshot_steps = {0, s.steps / 2, s.steps};
  s.pendulum.validate();
  s.flock.validate();
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_pendulum(const Flags& f) {
  const auto t0 = std::chrono::steady_clock::now();
  const Settings s = load_settings(f, "pendulum");
  const PendulumEnvironment env(s.pendulum);
  const PolicyAssignment assignment{s.policies, s.candidates};
  const EpisodeRecord rec = run_episode(env, env.hanging(), assignment, s.steps,
                                        pendulum_game(s.pendulum, s.game), s.control(false));
  const EpisodeSummary summary = summarize_pendulum_episode(s.pendulum, rec);

  CsvTable table;
  table.header = {"agent", "policy", "torque_bound", "final_angle", "final_deviation",
                  "final_empowerment", "mean_empowerment"};
  for (Index n = 0; n < env.agent_count(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    const double theta = rec.final_state.values(2 * n);
    table.rows.push_back({std::to_string(n), policy_name(s.policies[i]),
                          format_double(s.pendulum.torque_bounds[i]), format_double(theta),
                          format_double(wrap_angle(theta - kPi)),
                          format_double(summary.final_empowerment[i]),
                          format_double(summary.mean_empowerment[i])});
  }

  const Json cfg = settings_json(s, "pendulum");
  Report report;
  report.files = {{"summary.csv", table.str()},
                  {"trajectory.jsonl", trajectory_jsonl(rec, env.action_dim())}};
  report.metadata = run_metadata("pendulum", cfg, s.seed);
  report.metadata["outcome"] = outcome_name(summary.outcome);
  report.metadata["aborted"] = rec.aborted;
  report.metadata["error"] = rec.error;
  report.metadata["wall_time_s"] = seconds_since(t0);
  if (!f.out.empty()) emit_report(f.out, report);

  std::cout << "outcome " << outcome_name(summary.outcome) << "\n" << table.str();
  require(!rec.aborted, ErrorCode::kNonFiniteState, "episode aborted: " + rec.error);
  return 0;
}

int run_sweep_command(const Flags& f) {
  const auto t0 = std::chrono::steady_clock::now();
  const Settings s = load_settings(f, "sweep");
  SweepSpec spec = SweepSpec::grid(s.torques0, s.torques1);
  spec.policies = s.policies;
  spec.candidates = s.candidates;
  spec.steps = s.steps;
  spec.repetitions = s.repetitions;
  spec.seed = s.seed;
  spec.jitter = s.jitter;
  const auto cells = run_sweep(spec, s.pendulum, s.game, s.control(false), s.threads);

  const CsvTable table = heatmap_table(cells);
  Report report;
  report.files = {{"heatmap.csv", table.str()}};
  report.metadata = run_metadata("sweep", settings_json(s, "sweep"), s.seed);
  Json errors = Json::array();
  for (const auto& c : cells) {
    if (!c.error.empty()) {
      errors.push_back(Json{{"tau0", c.tau0}, {"tau1", c.tau1}, {"error", c.error}});
    }
  }
  report.metadata["cell_errors"] = errors;
  report.metadata["wall_time_s"] = seconds_since(t0);
  if (!f.out.empty()) emit_report(f.out, report);
  std::cout << table.str();
  return 0;
}

int run_flock_command(const Flags& f) {
  const auto t0 = std::chrono::steady_clock::now();
  const Settings s = load_settings(f, "flock");
  FlockStudyOptions study{s.snapshot_steps, s.histogram_bins};
  const FlockStudy r = run_flock_study(s.flock, PolicyAssignment{s.policies, s.candidates},
                                       s.steps, s.game, s.control(true), study);
  Report report;
  report.files = {{"series.csv", series_table(r.series).str()},
                  {"snapshots.csv", snapshot_table(r.snapshots).str()},
                  {"histograms.csv", histogram_table(r.snapshots).str()},
                  {"trajectory.jsonl",
                   trajectory_jsonl(r.episode, FlockEnvironment::kActionDim)}};
  report.metadata = run_metadata("flock", settings_json(s, "flock"), s.flock.seed);
  report.metadata["terminal_order"] = r.terminal_order;
  report.metadata["time_mean_empowerment"] = r.time_mean_empowerment;
  report.metadata["bimodality"] = Json{{"first_center", r.bimodality.first_center},
                                       {"second_center", r.bimodality.second_center},
                                       {"separation", r.bimodality.separation},
                                       {"mass", r.bimodality.mass},
                                       {"minor_share", r.bimodality.minor_share},
                                       {"passes", r.bimodality.passes}};
  report.metadata["aborted"] = r.episode.aborted;
  report.metadata["error"] = r.episode.error;
  report.metadata["wall_time_s"] = seconds_since(t0);
  if (!f.out.empty()) emit_report(f.out, report);

  std::cout << "terminal_order " << format_double(r.terminal_order) << "\n"
            << "time_mean_empowerment " << format_double(r.time_mean_empowerment) << "\n"
            << "bimodal " << (r.bimodality.passes ? "yes" : "no") << " separation "
            << format_double(r.bimodality.separation) << " mass "
            << format_double(r.bimodality.mass) << "\n";
  require(!r.episode.aborted, ErrorCode::kNonFiniteState,
          "episode aborted: " + r.episode.error);
  return 0;
}

int run_channel_command(const Flags& f) {
  const ChannelProblem p = parse_channel(read_file(f.channel_file));
  const EmpowermentReport r = solve_game(p.sensitivity, p.game);
  const Json out = report_json(r);
  if (!f.out.empty()) {
    Report report;
    report.files = {{"report.json", out.dump(2) + "\n"}};
    report.metadata = Json{{"tool", "mempower"},
                           {"command", "channel"},
                           {"channel_hash", hex64(fnv1a(read_file(f.channel_file)))}};
    emit_report(f.out, report);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

void error_record(std::string_view code, const std::string& message) {
  std::cerr << Json{{"error", Json{{"code", std::string(code)}, {"message", message}}}}.dump()
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent empowerment experiments"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&f](CLI::App* sub, bool control) {
    sub->add_option("--out", f.out, "Directory for data files and metadata.json");
    if (!control) return;
    sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--policy", f.policy,
                    "Per-agent policy: egoistic, passive or altruistic:N "
                    "(comma separated; one value applies to all agents)");
    sub->add_option("--horizon", f.horizon, "Planning horizon in steps")
        ->check(CLI::PositiveNumber);
    sub->add_option("--steps", f.steps, "Episode length in steps")->check(CLI::PositiveNumber);
    sub->add_option("--seed", f.seed, "Seed for flock noise and sweep jitter");
    sub->add_option("--sparsify", f.sparsify, "Neighborhood-local flock evaluation")
        ->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--candidates", f.candidates, "Candidate actions per coordinate (M)")
        ->check(CLI::Range(2, 1000001));
    sub->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
  };

  auto* pendulum = app.add_subcommand("pendulum", "Run one linked-pendulum episode");
  common(pendulum, true);
  pendulum->add_option("--torques", f.torques, "Torque bound per pendulum")->delimiter(',');
  auto* sweep = app.add_subcommand("sweep", "Torque-bound heatmap over two pendulums");
  common(sweep, true);
  sweep->add_option("--torques", f.torques, "Torque values for both grid axes")
      ->delimiter(',');
  auto* flock = app.add_subcommand("flock", "Flock study: order and empowerment over time");
  common(flock, true);
  auto* channel = app.add_subcommand("channel", "Iterative water-filling on a channel file");
  common(channel, false);
  channel->add_option("file", f.channel_file, "Channel file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_record("Usage", e.what());
    return 2;
  }

  try {
    if (pendulum->parsed()) return run_pendulum(f);
    if (sweep->parsed()) return run_sweep_command(f);
    if (flock->parsed()) return run_flock_command(f);
    return run_channel_command(f);
  } catch (const Error& e) {
    error_record(error_code_name(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_record("Internal", e.what());
    return 1;
  }
}
