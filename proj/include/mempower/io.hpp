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

// File formats: JSON configs, JSON Lines trajectories, CSV tables and the
// plain-text channel file read by `mempower channel`.
//
// Channel file:
//
//   # comment
//   agents 2
//   state_dim 1
//   input_dims 2 2
//   budgets 1 1
//   noise_variance 0.01 0.01
//   block 0 0
//   1 0.5
//   block 0 1
//   0.2 0
//
// Every `block n m` line is followed by state_dim rows of input_dims[m]
// numbers. Blocks never listed are structurally zero. `noise n` followed by
// state_dim rows replaces agent n's isotropic noise. `tolerance` and
// `max_sweeps` are optional. Sensors are the identity.

#ifndef MEMPOWER_IO_HPP_
#define MEMPOWER_IO_HPP_

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "mempower/control.hpp"
#include "mempower/error.hpp"
#include "mempower/flock.hpp"
#include "mempower/game.hpp"
#include "mempower/pendulum.hpp"

namespace mempower {

using Json = nlohmann::ordered_json;

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view text) {
  double v = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  require(r.ec == std::errc() && r.ptr == text.data() + text.size(), ErrorCode::kParse,
          "not a number: '" + std::string(text) + "'");
  return v;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  for (int i = 15; i >= 0; --i) {
    buf[i] = "0123456789abcdef"[v & 0xf];
    v >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

// ---- files ----

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    require(!ec, ErrorCode::kIo, "cannot create '" + path.parent_path().string() + "'");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  require(static_cast<bool>(out), ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

// ---- JSON configs ----

namespace detail {

// Rejects keys not in `known`.
inline void check_keys(const Json& j, std::initializer_list<std::string_view> known,
                       std::string_view where) {
  require(j.is_object(), ErrorCode::kParse, std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    require(ok, ErrorCode::kParse,
            "unknown key '" + key + "' in " + std::string(where));
  }
}

template <class T>
void read_key(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline Json to_json(const PendulumConfig& c) {
  return Json{{"masses", c.masses},         {"lengths", c.lengths},
              {"torque_bounds", c.torque_bounds}, {"separation", c.separation},
              {"gravity", c.gravity},       {"damping", c.damping},
              {"stiffness", c.stiffness},   {"rest_length", c.rest_length},
              {"time_step", c.time_step}};
}

inline PendulumConfig pendulum_config_from_json(const Json& j) {
  detail::check_keys(j,
                     {"masses", "lengths", "torque_bounds", "separation", "gravity",
                      "damping", "stiffness", "rest_length", "time_step"},
                     "pendulum config");
  PendulumConfig c;
  detail::read_key(j, "masses", c.masses);
  detail::read_key(j, "lengths", c.lengths);
  detail::read_key(j, "torque_bounds", c.torque_bounds);
  detail::read_key(j, "separation", c.separation);
  detail::read_key(j, "gravity", c.gravity);
  detail::read_key(j, "damping", c.damping);
  detail::read_key(j, "stiffness", c.stiffness);
  detail::read_key(j, "rest_length", c.rest_length);
  detail::read_key(j, "time_step", c.time_step);
  c.validate();
  return c;
}

inline Json to_json(const FlockConfig& c) {
  return Json{{"agents", c.agents},
              {"speed", c.speed},
              {"radius", c.radius},
              {"alignment", c.alignment},
              {"noise", c.noise},
              {"accel_bound", c.accel_bound},
              {"angular_damping", c.angular_damping},
              {"domain", c.domain},
              {"time_step", c.time_step},
              {"seed", c.seed}};
}

inline FlockConfig flock_config_from_json(const Json& j) {
  detail::check_keys(j,
                     {"agents", "speed", "radius", "alignment", "noise", "accel_bound",
                      "angular_damping", "domain", "time_step", "seed"},
                     "flock config");
  FlockConfig c;
  detail::read_key(j, "agents", c.agents);
  detail::read_key(j, "speed", c.speed);
  detail::read_key(j, "radius", c.radius);
  detail::read_key(j, "alignment", c.alignment);
  detail::read_key(j, "noise", c.noise);
  detail::read_key(j, "accel_bound", c.accel_bound);
  detail::read_key(j, "angular_damping", c.angular_damping);
  detail::read_key(j, "domain", c.domain);
  detail::read_key(j, "time_step", c.time_step);
  detail::read_key(j, "seed", c.seed);
  c.validate();
  return c;
}

inline Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

// ---- channel files ----

struct ChannelProblem {
  SensitivityMatrix sensitivity;
  GameConfig game;
};

inline ChannelProblem parse_channel(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::vector<int> line_no;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream words(line);
      std::vector<std::string> tokens;
      for (std::string w; words >> w;) tokens.push_back(w);
      if (!tokens.empty()) {
        lines.push_back(std::move(tokens));
        line_no.push_back(no);
      }
    }
  }
  auto where = [&](std::size_t i) { return "channel file line " + std::to_string(line_no[i]); };
  auto as_index = [&](const std::string& s, std::size_t i) {
    const double v = parse_double(s);
    require(v >= 0.0 && v == static_cast<double>(static_cast<Index>(v)), ErrorCode::kParse,
            where(i) + ": expected a nonnegative integer, got '" + s + "'");
    return static_cast<Index>(v);
  };

  Index agents = -1;
  Index state_dim = -1;
  std::vector<Index> input_dims;
  std::vector<double> budgets;
  std::vector<double> noise_variance;
  double tolerance = GameConfig{}.tolerance;
  int max_sweeps = GameConfig{}.max_sweeps;

  // Header: everything before the first block/noise section.
  std::size_t i = 0;
  for (; i < lines.size(); ++i) {
    const auto& t = lines[i];
    if (t[0] == "block" || t[0] == "noise") break;
    auto values = [&] {
      require(t.size() >= 2, ErrorCode::kParse, where(i) + ": '" + t[0] + "' needs values");
      return std::vector<std::string>(t.begin() + 1, t.end());
    };
    if (t[0] == "agents") {
      agents = as_index(values().at(0), i);
    } else if (t[0] == "state_dim") {
      state_dim = as_index(values().at(0), i);
    } else if (t[0] == "input_dims") {
      for (const auto& v : values()) input_dims.push_back(as_index(v, i));
    } else if (t[0] == "budgets") {
      for (const auto& v : values()) budgets.push_back(parse_double(v));
    } else if (t[0] == "noise_variance") {
      for (const auto& v : values()) noise_variance.push_back(parse_double(v));
    } else if (t[0] == "tolerance") {
      tolerance = parse_double(values().at(0));
    } else if (t[0] == "max_sweeps") {
      max_sweeps = static_cast<int>(as_index(values().at(0), i));
    } else {
      fail(ErrorCode::kParse, where(i) + ": unknown header key '" + t[0] + "'");
    }
  }
  require(agents >= 1 && state_dim >= 1, ErrorCode::kParse,
          "channel file needs positive 'agents' and 'state_dim'");
  const auto n = static_cast<std::size_t>(agents);
  require(input_dims.size() == n && budgets.size() == n, ErrorCode::kDimensionMismatch,
          "channel file needs one input_dims and budgets entry per agent");
  if (noise_variance.size() == 1) noise_variance.assign(n, noise_variance[0]);
  require(noise_variance.empty() || noise_variance.size() == n,
          ErrorCode::kDimensionMismatch, "noise_variance needs 1 or N entries");

  ChannelProblem p{SensitivityMatrix(agents, state_dim, input_dims), GameConfig{}};
  p.game.tolerance = tolerance;
  p.game.max_sweeps = max_sweeps;
  for (std::size_t a = 0; a < n; ++a) {
    p.game.budgets.emplace_back(budgets[a]);
    p.game.sensors.push_back(Matrix::Identity(state_dim, state_dim));
    const double var = noise_variance.empty() ? 1.0 : noise_variance[a];
    p.game.sensor_noise.push_back(var * Matrix::Identity(state_dim, state_dim));
  }
  std::vector<char> seen(n * n, 0);

  auto read_rows = [&](std::size_t& at, Index cols) {
    Matrix m(state_dim, cols);
    for (Index r = 0; r < state_dim; ++r) {
      ++at;
      require(at < lines.size(), ErrorCode::kParse, "channel file ends inside a matrix");
      require(static_cast<Index>(lines[at].size()) == cols, ErrorCode::kDimensionMismatch,
              where(at) + ": expected " + std::to_string(cols) + " numbers, got " +
                  std::to_string(lines[at].size()));
      for (Index c = 0; c < cols; ++c) {
        m(r, c) = parse_double(lines[at][static_cast<std::size_t>(c)]);
      }
    }
    return m;
  };

  for (; i < lines.size(); ++i) {
    const auto& t = lines[i];
    if (t[0] == "block") {
      require(t.size() == 3, ErrorCode::kParse, where(i) + ": expected 'block n m'");
      const Index bn = as_index(t[1], i);
      const Index bm = as_index(t[2], i);
      require(bn < agents && bm < agents, ErrorCode::kDimensionMismatch,
              where(i) + ": block index out of range");
      const std::size_t at = static_cast<std::size_t>(bn * agents + bm);
      require(!seen[at], ErrorCode::kParse, where(i) + ": block given twice");
      seen[at] = 1;
      std::size_t cursor = i;
      p.sensitivity.block(bn, bm) = read_rows(cursor, input_dims[static_cast<std::size_t>(bm)]);
      i = cursor;
    } else if (t[0] == "noise") {
      require(t.size() == 2, ErrorCode::kParse, where(i) + ": expected 'noise n'");
      const Index a = as_index(t[1], i);
      require(a < agents, ErrorCode::kDimensionMismatch, where(i) + ": agent out of range");
      std::size_t cursor = i;
      p.game.sensor_noise[static_cast<std::size_t>(a)] = read_rows(cursor, state_dim);
      i = cursor;
    } else {
      fail(ErrorCode::kParse, where(i) + ": expected 'block' or 'noise', got '" + t[0] + "'");
    }
  }
  for (Index a = 0; a < agents; ++a) {
    for (Index b = 0; b < agents; ++b) {
      if (!seen[static_cast<std::size_t>(a * agents + b)]) p.sensitivity.clear_block(a, b);
    }
  }
  return p;
}

inline std::string format_channel(const ChannelProblem& p) {
  const SensitivityMatrix& s = p.sensitivity;
  std::string out = "agents " + std::to_string(s.agents()) + "\nstate_dim " +
                    std::to_string(s.state_dim()) + "\ninput_dims";
  for (Index d : s.input_dims()) out += " " + std::to_string(d);
  out += "\nbudgets";
  for (const auto& b : p.game.budgets) out += " " + format_double(b.value());
  out += "\ntolerance " + format_double(p.game.tolerance) + "\nmax_sweeps " +
         std::to_string(p.game.max_sweeps) + "\n";
  auto rows = [&out](const Matrix& m) {
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) {
        out += (c ? " " : "") + format_double(m(r, c));
      }
      out += "\n";
    }
  };
  for (Index a = 0; a < s.agents(); ++a) {
    out += "noise " + std::to_string(a) + "\n";
    rows(p.game.sensor_noise[static_cast<std::size_t>(a)]);
  }
  for (Index a = 0; a < s.agents(); ++a) {
    for (Index b = 0; b < s.agents(); ++b) {
      if (!s.block_active(a, b)) continue;
      out += "block " + std::to_string(a) + " " + std::to_string(b) + "\n";
      rows(s.block(a, b));
    }
  }
  return out;
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json report_json(const EmpowermentReport& r) {
  Json covs = Json::array();
  for (const Matrix& s : r.covariances) covs.push_back(matrix_json(s));
  return Json{{"empowerment", r.empowerment},
              {"sweeps_used", r.sweeps_used},
              {"converged", r.converged},
              {"final_residual", r.final_residual},
              {"covariances", std::move(covs)}};
}

// ---- trajectories ----

/// One JSON object per step: time, per-agent state, per-agent action,
/// per-agent empowerment and game diagnostics.
inline std::string trajectory_jsonl(const EpisodeRecord& record, Index action_dim) {
  std::string out;
  for (const StepRecord& s : record.steps) {
    Json states = Json::array();
    Json actions = Json::array();
    for (Index n = 0; n < s.state.agents; ++n) {
      Json st = Json::array();
      for (Index i = 0; i < s.state.state_dim; ++i) st.push_back(s.state.agent(n)(i));
      states.push_back(std::move(st));
      Json act = Json::array();
      for (Index c = 0; c < action_dim; ++c) act.push_back(s.action(n * action_dim + c));
      actions.push_back(std::move(act));
    }
    Json line{{"time", s.time},         {"state", std::move(states)},
              {"action", std::move(actions)}, {"empowerment", s.empowerment},
              {"sweeps", s.sweeps},     {"converged", s.converged},
              {"flagged", s.flagged}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

// ---- CSV ----

/// Comma-separated table with a header row; cells are written verbatim.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }

  static CsvTable parse(std::string_view text) {
    CsvTable t;
    std::istringstream in{std::string(text)};
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::size_t start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (first) {
        t.header = std::move(cells);
        first = false;
      } else {
        require(cells.size() == t.header.size(), ErrorCode::kParse,
                "csv row has " + std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
      }
    }
    require(!first, ErrorCode::kParse, "csv has no header");
    return t;
  }

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    fail(ErrorCode::kParse, "csv has no column '" + std::string(name) + "'");
  }
};

}  // namespace mempower

#endif  // MEMPOWER_IO_HPP_
