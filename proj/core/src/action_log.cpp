// Copyright 2026 The gridtalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>

#include "gridtalk/voxel.hpp"
#include "json_codec.hpp"

namespace gridtalk {

namespace codec {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(Errc::SchemaError, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

Json parse(std::string_view text, std::size_t line) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::string where = line ? " at line " + std::to_string(line) : std::string();
    throw Error(Errc::ParseError, "malformed record" + where + ": " + e.what(),
                line ? std::optional<std::size_t>(line) : std::nullopt);
  }
}

Json position_to_json(const voxel::Position& p) { return Json::array({p.x, p.y, p.z}); }

voxel::Position position_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(Errc::SchemaError, "position must be [x,y,z]");
  voxel::Position p{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
  return p;
}

namespace {

voxel::BlockColor color_from_json(const Json& j) {
  auto c = voxel::parse_color(j.get<std::string>());
  if (!c) throw Error(Errc::SchemaError, "unknown color '" + j.get<std::string>() + "'");
  return *c;
}

}  // namespace

Json blocks_to_json(const voxel::VoxelWorld& world) {
  Json arr = Json::array();
  for (const auto& p : world.blocks()) {
    arr.push_back(Json::array({p.x, p.y, p.z, std::string(voxel::color_name(*world.at(p)))}));
  }
  return arr;
}

voxel::VoxelWorld blocks_from_json(const Json& j) {
  if (!j.is_array()) throw Error(Errc::SchemaError, "world must be a list of [x,y,z,color]");
  voxel::VoxelWorld w;
  for (const auto& b : j) {
    if (!b.is_array() || b.size() != 4) throw Error(Errc::SchemaError, "block must be [x,y,z,color]");
    voxel::Position p{b[0].get<int>(), b[1].get<int>(), b[2].get<int>()};
    if (!voxel::in_bounds(p)) throw Error(Errc::SchemaError, "block outside the grid");
    w.set(p, color_from_json(b[3]));
  }
  return w;
}

Json agent_to_json(const voxel::AgentState& agent) {
  Json j;
  j["pos"] = position_to_json(agent.position);
  j["facing"] = std::string(voxel::direction_code(agent.facing));
  if (agent.lifted) j["lifted"] = true;
  return j;
}

voxel::AgentState agent_from_json(const Json& j) {
  voxel::AgentState a;
  a.position = position_from_json(require(j, "pos"));
  auto f = voxel::parse_direction(require(j, "facing").get<std::string>());
  if (!f) throw Error(Errc::SchemaError, "facing must be one of N,S,E,W");
  a.facing = *f;
  a.lifted = j.contains("lifted") && j.at("lifted").get<bool>();
  return a;
}

Json action_to_json(const voxel::Action& a) {
  Json j;
  j["t"] = a.t_ms;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, voxel::Place>) {
          j["kind"] = "place";
          j["pos"] = position_to_json(k.pos);
          j["color"] = std::string(voxel::color_name(k.color));
        } else if constexpr (std::is_same_v<K, voxel::Break>) {
          j["kind"] = "break";
          j["pos"] = position_to_json(k.pos);
        } else if constexpr (std::is_same_v<K, voxel::Move>) {
          j["kind"] = "move";
          j["dir"] = std::string(voxel::direction_code(k.dir));
        } else {
          j["kind"] = "jump";
        }
      },
      a.kind);
  return j;
}

voxel::Action action_from_json(const Json& j) {
  voxel::Action a;
  try {
    a.t_ms = require(j, "t").get<std::int64_t>();
    auto kind = require(j, "kind").get<std::string>();
    if (kind == "place") {
      a.kind = voxel::Place{position_from_json(require(j, "pos")), color_from_json(require(j, "color"))};
    } else if (kind == "break") {
      a.kind = voxel::Break{position_from_json(require(j, "pos"))};
    } else if (kind == "move") {
      auto d = voxel::parse_direction(require(j, "dir").get<std::string>());
      if (!d) throw Error(Errc::SchemaError, "dir must be one of N,S,E,W");
      a.kind = voxel::Move{*d};
    } else if (kind == "jump") {
      a.kind = voxel::Jump{};
    } else {
      throw Error(Errc::SchemaError, "unknown action kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SchemaError, std::string("bad action field: ") + e.what());
  }
  return a;
}

Json actions_to_json(const std::vector<voxel::Action>& steps) {
  Json arr = Json::array();
  for (const auto& a : steps) arr.push_back(action_to_json(a));
  return arr;
}

std::vector<voxel::Action> actions_from_json(const Json& j) {
  if (!j.is_array()) throw Error(Errc::SchemaError, "actions must be a list");
  std::vector<voxel::Action> out;
  out.reserve(j.size());
  for (const auto& a : j) out.push_back(action_from_json(a));
  return out;
}

}  // namespace codec

namespace voxel {

ActionLog::ActionLog(VoxelWorld initial, AgentState agent, Rules rules)
    : initial_(std::move(initial)), agent_(agent), rules_(rules), tail_{initial_, agent_} {}

void ActionLog::append(const Action& a) {
  const std::size_t step = steps_.size() + 1;
  if (!steps_.empty() && a.t_ms < steps_.back().t_ms) {
    throw Error(Errc::NonMonotoneTimestamp, "timestamps must be non-decreasing", step);
  }
  if (auto err = check_action(tail_.world, tail_.agent, a, rules_)) {
    throw Error(*err, "step " + std::to_string(step) + " rejected", step);
  }
  apply_action_inplace(tail_, a, rules_);
  steps_.push_back(a);
}

std::int64_t ActionLog::duration_ms() const noexcept {
  if (steps_.size() < 2) return 0;
  return steps_.back().t_ms - steps_.front().t_ms;
}

std::string ActionLog::to_jsonl() const {
  std::string out;
  codec::Json header;
  header["world"] = codec::blocks_to_json(initial_);
  header["agent"] = codec::agent_to_json(agent_);
  out += header.dump();
  out += '\n';
  for (const auto& a : steps_) {
    out += codec::action_to_json(a).dump();
    out += '\n';
  }
  return out;
}

ActionLog ActionLog::parse_jsonl(std::string_view text, Rules rules) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::optional<ActionLog> log;
  std::vector<Action> steps;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto j = codec::parse(line, lineno);
    try {
      if (!log) {
        log.emplace();
        log->initial_ = codec::blocks_from_json(codec::require(j, "world"));
        log->agent_ = codec::agent_from_json(codec::require(j, "agent"));
        log->rules_ = rules;
      } else {
        steps.push_back(codec::action_from_json(j));
      }
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (line " + std::to_string(lineno) + ")", lineno);
    }
  }
  if (!log) throw Error(Errc::ParseError, "action log has no header record");
  return unchecked(log->initial_, log->agent_, std::move(steps), rules);
}

ActionLog ActionLog::unchecked(VoxelWorld initial, AgentState agent, std::vector<Action> steps,
                               Rules rules) {
  ActionLog log(std::move(initial), agent, rules);
  log.steps_ = std::move(steps);
  // tail_ is only meaningful once validated; compute it leniently.
  for (const auto& a : log.steps_) {
    if (check_action(log.tail_.world, log.tail_.agent, a, rules)) break;
    apply_action_inplace(log.tail_, a, rules);
  }
  return log;
}

void ActionLog::validate() const {
  State s{initial_, agent_};
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const std::size_t step = i + 1;
    if (i > 0 && steps_[i].t_ms < steps_[i - 1].t_ms) {
      throw Error(Errc::IllegalActions, "step " + std::to_string(step) + ": timestamp decreases",
                  step, Errc::NonMonotoneTimestamp);
    }
    if (auto err = check_action(s.world, s.agent, steps_[i], rules_)) {
      throw Error(Errc::IllegalActions,
                  "step " + std::to_string(step) + ": " + std::string(errc_name(*err)), step, *err);
    }
    apply_action_inplace(s, steps_[i], rules_);
  }
}

State replay(const ActionLog& log) {
  State s{log.initial_world(), log.initial_agent()};
  const auto& steps = log.steps();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (auto err = check_action(s.world, s.agent, steps[i], log.rules())) {
      throw Error(Errc::CorruptLog,
                  "step " + std::to_string(i + 1) + " fails on replay: " + std::string(errc_name(*err)),
                  i + 1, *err);
    }
    apply_action_inplace(s, steps[i], log.rules());
  }
  return s;
}

}  // namespace voxel
}  // namespace gridtalk
