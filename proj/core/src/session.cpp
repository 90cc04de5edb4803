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

#include "gridtalk/session.hpp"

#include <chrono>
#include <cstdio>

#include "gridtalk/digest.hpp"
#include "gridtalk/error.hpp"

namespace gridtalk::session {

namespace {

std::int64_t system_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

SessionStatus initial_status(GameMode mode) {
  return mode == GameMode::SingleTurnBuild ? SessionStatus::AwaitingBuilder : SessionStatus::AwaitingArchitect;
}

// Status after an architect instruction in the given mode.
SessionStatus after_instruction(GameMode mode) {
  return mode == GameMode::SingleTurnBuild ? SessionStatus::Complete : SessionStatus::AwaitingBuilder;
}

[[noreturn]] void wrong_turn(const std::string& what, SessionStatus status) {
  throw Error(Errc::WrongTurn, what + " not allowed while " + std::string(status_name(status)));
}

}  // namespace

SessionService::SessionService(std::shared_ptr<TablesStore> tables, std::shared_ptr<ObjectStore> objects,
                               SessionConfig config)
    : tables_(std::move(tables)), objects_(std::move(objects)), config_(std::move(config)) {
  if (!tables_ || !objects_) throw Error(Errc::InvalidArgument, "session service needs both stores");
  restore();
}

std::int64_t SessionService::now() const { return config_.clock ? config_.clock() : system_ms(); }

void SessionService::restore() {
  for (const auto& row : tables_->games()) {
    auto live = std::make_shared<Live>();
    live->row = row;
    live->status = initial_status(row.mode);
    live->world_digest = row.initial_world;
    live->world = dataset::get_world(*objects_, row.initial_world);
    for (const auto& t : tables_->turns(row.id)) {
      switch (t.kind) {
        case TurnKind::Instruction:
          live->status = after_instruction(row.mode);
          break;
        case TurnKind::Question:
          live->status = SessionStatus::AwaitingArchitect;
          break;
        case TurnKind::Actions:
          live->status = SessionStatus::AwaitingArchitect;
          [[fallthrough]];
        case TurnKind::Judgment:
          if (!t.world_digest.empty()) {
            live->world_digest = t.world_digest;
            live->world = dataset::get_world(*objects_, t.world_digest);
            ++live->world_version;
          }
          if (t.kind == TurnKind::Judgment) live->status = SessionStatus::Complete;
          break;
        case TurnKind::Completion:
          live->status = SessionStatus::Complete;
          break;
      }
      ++live->turns;
      ++live->version;
    }
    live_.emplace(row.id, live);
    ++next_id_;
  }
}

std::shared_ptr<SessionService::Live> SessionService::find(const std::string& game_id) const {
  std::shared_lock lock(index_mu_);
  auto it = live_.find(game_id);
  if (it == live_.end()) throw Error(Errc::UnknownGame, "no game " + game_id);
  return it->second;
}

RoleKind SessionService::authenticate(const Live& live, const std::string& key) const {
  const std::string digest = sha256_hex(key);
  if (digest == live.row.architect_key_digest) return RoleKind::Architect;
  if (digest == live.row.builder_key_digest) return RoleKind::Builder;
  throw Error(Errc::AuthFailure, "role key not valid for game " + live.row.id);
}

void SessionService::require_role(const Live& live, const std::string& key, RoleKind role) const {
  if (authenticate(live, key) != role) {
    throw Error(Errc::AuthFailure, std::string("this action needs the ") +
                                       (role == RoleKind::Architect ? "architect" : "builder") + " key");
  }
}

void SessionService::check_version(const Live& live, std::optional<std::uint64_t> expected) const {
  if (expected && *expected != live.version) {
    throw Error(Errc::StaleVersion, "expected version " + std::to_string(*expected) + " but session is at " +
                                        std::to_string(live.version));
  }
}

SessionView SessionService::view_of(const Live& live) const {
  return {live.row.id,       live.row.mode,      live.status,       live.version, live.world_version,
          live.turns,        live.row.target_id, live.world_digest, live.world};
}

TurnRow SessionService::next_row(const Live& live, TurnKind kind) const {
  TurnRow row;
  row.game_id = live.row.id;
  row.turn = live.turns;
  row.kind = kind;
  row.at_ms = now();
  return row;
}

voxel::ActionLog SessionService::build_log(const Live& live, const voxel::AgentState& agent,
                                           const std::vector<voxel::Action>& actions) const {
  voxel::ActionLog log(live.world, agent, config_.rules);
  for (const auto& a : actions) {
    try {
      log.append(a);
    } catch (const Error& e) {
      throw Error(Errc::IllegalActions, e.what(), e.step(), e.code());
    }
  }
  return log;
}

CreatedGame SessionService::create_game(GameMode mode, const std::optional<std::string>& target_id,
                                        const std::optional<std::string>& world_id) {
  GameRow row;
  row.mode = mode;
  if (mode == GameMode::MultiTurn) {
    if (!target_id || !objects_->contains(*target_id)) {
      throw Error(Errc::UnknownTarget, "unknown target " + target_id.value_or("<none>"));
    }
    row.target_id = *target_id;
    dataset::get_world(*objects_, *target_id);  // must decode as a world
  }
  voxel::VoxelWorld start;
  if (world_id) {
    if (!objects_->contains(*world_id)) throw Error(Errc::UnknownWorld, "unknown world " + *world_id);
    start = dataset::get_world(*objects_, *world_id);
  } else if (mode != GameMode::MultiTurn) {
    throw Error(Errc::UnknownWorld, "single-turn sessions need a seed world");
  }
  row.initial_world = dataset::put_world(*objects_, start);

  CreatedGame out;
  out.architect_key = random_token();
  out.builder_key = random_token();
  row.architect_key_digest = sha256_hex(out.architect_key);
  row.builder_key_digest = sha256_hex(out.builder_key);
  row.created_ms = now();

  auto live = std::make_shared<Live>();
  live->status = initial_status(mode);
  live->world = start;
  live->world_digest = row.initial_world;
  {
    std::unique_lock lock(index_mu_);
    char buf[32];
    do {
      std::snprintf(buf, sizeof buf, "game-%06llu", static_cast<unsigned long long>(next_id_++));
    } while (live_.count(buf));
    row.id = buf;
    live->row = row;
    tables_->insert_game(row);
    live_.emplace(row.id, live);
  }
  out.view = view_of(*live);
  return out;
}

SessionView SessionService::state(const std::string& game_id, const std::string& role_key) const {
  auto live = find(game_id);
  std::lock_guard lock(live->mu);
  authenticate(*live, role_key);
  return view_of(*live);
}

RoleKind SessionService::role_of(const std::string& game_id, const std::string& role_key) const {
  auto live = find(game_id);
  return authenticate(*live, role_key);
}

std::vector<TurnRow> SessionService::turns(const std::string& game_id, const std::string& role_key) const {
  auto live = find(game_id);
  {
    std::lock_guard lock(live->mu);
    authenticate(*live, role_key);
  }
  return tables_->turns(game_id);
}

std::optional<std::uint64_t> SessionService::version_of(const std::string& game_id) const {
  std::shared_lock lock(index_mu_);
  auto it = live_.find(game_id);
  if (it == live_.end()) return std::nullopt;
  std::lock_guard game_lock(it->second->mu);
  return it->second->version;
}

TurnResult SessionService::post_instruction(const std::string& game_id, const std::string& architect_key,
                                            const std::string& text, std::optional<std::uint64_t> expected_version) {
  auto live = find(game_id);
  std::lock_guard lock(live->mu);
  require_role(*live, architect_key, RoleKind::Architect);
  check_version(*live, expected_version);
  if (live->status != SessionStatus::AwaitingArchitect) wrong_turn("instruction", live->status);
  if (auto reason = dataset::check_instruction(text, config_.clean)) {
    throw Error(Errc::RejectedText, std::string(dataset::drop_reason_name(*reason)) + ": instruction rejected");
  }
  TurnRow row = next_row(*live, TurnKind::Instruction);
  row.text = text;
  tables_->insert_turn(row);
  live->status = after_instruction(live->row.mode);
  ++live->turns;
  ++live->version;
  return {view_of(*live), row};
}

TurnResult SessionService::post_builder_turn(const std::string& game_id, const std::string& builder_key,
                                             const BuilderPayload& payload,
                                             std::optional<std::uint64_t> expected_version) {
  auto live = find(game_id);
  std::lock_guard lock(live->mu);
  require_role(*live, builder_key, RoleKind::Builder);
  check_version(*live, expected_version);
  if (live->row.mode == GameMode::SingleTurnJudge) wrong_turn("a builder turn in a judge session", live->status);
  if (live->status != SessionStatus::AwaitingBuilder) wrong_turn("builder turn", live->status);
  if (payload.question.has_value() == payload.actions.has_value()) {
    throw Error(Errc::InvalidPayload, "builder turn needs exactly one of question or actions");
  }

  if (payload.question) {
    if (live->row.mode != GameMode::MultiTurn) {
      throw Error(Errc::InvalidPayload, "single-turn build sessions take actions only");
    }
    if (payload.question->find_first_not_of(" \t\r\n") == std::string::npos) {
      throw Error(Errc::InvalidPayload, "question text must be non-empty");
    }
    TurnRow row = next_row(*live, TurnKind::Question);
    row.text = *payload.question;
    tables_->insert_turn(row);
    live->status = SessionStatus::AwaitingArchitect;
    ++live->turns;
    ++live->version;
    return {view_of(*live), row};
  }

  voxel::ActionLog log = build_log(*live, payload.agent, *payload.actions);
  TurnRow row = next_row(*live, TurnKind::Actions);
  row.log_digest = objects_->put(log.to_jsonl());
  row.world_digest = dataset::put_world(*objects_, log.tail().world);
  row.over_time = log.duration_ms() > dataset::kBuildWindowMs;
  tables_->insert_turn(row);
  live->world = log.tail().world;
  live->world_digest = row.world_digest;
  ++live->world_version;
  live->status = SessionStatus::AwaitingArchitect;
  ++live->turns;
  ++live->version;
  return {view_of(*live), row};
}

CompletionReport SessionService::mark_complete(const std::string& game_id, const std::string& architect_key,
                                               std::optional<std::uint64_t> expected_version) {
  auto live = find(game_id);
  std::lock_guard lock(live->mu);
  require_role(*live, architect_key, RoleKind::Architect);
  check_version(*live, expected_version);
  if (live->row.mode != GameMode::MultiTurn) wrong_turn("completion of a single-turn session", live->status);
  if (live->status != SessionStatus::AwaitingArchitect) wrong_turn("completion", live->status);
  TurnRow row = next_row(*live, TurnKind::Completion);
  tables_->insert_turn(row);
  live->status = SessionStatus::Complete;
  ++live->turns;
  ++live->version;
  CompletionReport out;
  out.match = structure::match(live->world, dataset::get_world(*objects_, live->row.target_id));
  out.view = view_of(*live);
  return out;
}

TurnResult SessionService::submit_judgment(const std::string& game_id, const std::string& builder_key,
                                           const Judgment& judgment, std::optional<std::uint64_t> expected_version) {
  auto live = find(game_id);
  std::lock_guard lock(live->mu);
  require_role(*live, builder_key, RoleKind::Builder);
  check_version(*live, expected_version);
  if (live->row.mode != GameMode::SingleTurnJudge) wrong_turn("a judgment outside judge sessions", live->status);
  if (live->status != SessionStatus::AwaitingBuilder) wrong_turn("judgment", live->status);

  std::vector<std::string> questions;
  for (const auto& q : judgment.questions) {
    if (q.find_first_not_of(" \t\r\n") != std::string::npos) questions.push_back(q);
  }
  if (!judgment.clear && questions.empty()) {
    throw Error(Errc::MissingQuestion, "an unclear instruction must come with a clarifying question");
  }
  if (judgment.clear && (!judgment.rebuild || judgment.rebuild->empty())) {
    throw Error(Errc::MissingRebuild, "a clear judgment must include the rebuilt structure");
  }

  TurnRow row = next_row(*live, TurnKind::Judgment);
  row.clear = judgment.clear;
  row.questions = questions;
  std::optional<voxel::ActionLog> log;
  if (judgment.rebuild) {
    log = build_log(*live, judgment.agent, *judgment.rebuild);
    row.log_digest = objects_->put(log->to_jsonl());
    row.world_digest = dataset::put_world(*objects_, log->tail().world);
    row.over_time = log->duration_ms() > dataset::kBuildWindowMs;
  }
  tables_->insert_turn(row);
  if (log) {
    live->world = log->tail().world;
    live->world_digest = row.world_digest;
    ++live->world_version;
  }
  live->status = SessionStatus::Complete;
  ++live->turns;
  ++live->version;
  return {view_of(*live), row};
}

std::vector<dataset::GameRecord> SessionService::export_games() const {
  std::vector<dataset::GameRecord> out;
  for (const auto& g : tables_->games()) {
    if (g.mode != GameMode::MultiTurn) continue;
    dataset::GameRecord rec;
    rec.id = g.id;
    rec.target_id = g.target_id;
    std::int64_t last = g.created_ms;
    for (const auto& t : tables_->turns(g.id)) {
      last = t.at_ms;
      dataset::Turn turn;
      switch (t.kind) {
        case TurnKind::Instruction:
          turn.role = dataset::Role::Architect;
          turn.utterance = t.text;
          break;
        case TurnKind::Question:
          turn.role = dataset::Role::Builder;
          turn.utterance = t.text;
          turn.question = true;
          break;
        case TurnKind::Actions:
          turn.role = dataset::Role::Builder;
          turn.actions = voxel::ActionLog::parse_jsonl(objects_->get(t.log_digest), config_.rules);
          break;
        case TurnKind::Completion:
          turn.role = dataset::Role::Architect;
          turn.utterance = "complete";
          turn.completion_mark = true;
          rec.completed = true;
          break;
        case TurnKind::Judgment:
          throw Error(Errc::CorruptLog, "judgment row in multi-turn game " + g.id);
      }
      rec.turns.push_back(std::move(turn));
    }
    rec.duration_minutes = static_cast<double>(last - g.created_ms) / 60000.0;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<dataset::SingleTurnSample> SessionService::export_samples() const {
  std::vector<dataset::SingleTurnSample> out;
  for (const auto& g : tables_->games()) {
    if (g.mode != GameMode::SingleTurnJudge) continue;
    auto rows = tables_->turns(g.id);
    if (rows.size() != 2 || rows[1].kind != TurnKind::Judgment) continue;
    dataset::SingleTurnSample s;
    s.id = g.id;
    s.world_id = g.initial_world;
    s.instruction = rows[0].text;
    s.clear = rows[1].clear.value_or(true);
    s.questions = rows[1].questions;
    if (!rows[1].log_digest.empty()) {
      s.actions = voxel::ActionLog::parse_jsonl(objects_->get(rows[1].log_digest), config_.rules);
    } else {
      s.actions = voxel::ActionLog(dataset::get_world(*objects_, g.initial_world), voxel::AgentState{}, config_.rules);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t SessionService::audit_logs() const {
  std::size_t checked = 0;
  for (const auto& g : tables_->games()) {
    std::string base = g.initial_world;
    for (const auto& t : tables_->turns(g.id)) {
      if (t.log_digest.empty()) continue;
      auto log = voxel::ActionLog::parse_jsonl(objects_->get(t.log_digest), config_.rules);
      if (!(log.initial_world() == dataset::get_world(*objects_, base))) {
        throw Error(Errc::CorruptLog, "log of " + g.id + " turn " + std::to_string(t.turn) + " has the wrong base");
      }
      auto final_state = voxel::replay(log);
      if (sha256_hex(voxel::world_to_json(final_state.world)) != t.world_digest) {
        throw Error(Errc::CorruptLog, "log of " + g.id + " turn " + std::to_string(t.turn) + " ends elsewhere");
      }
      base = t.world_digest;
      ++checked;
    }
  }
  return checked;
}

}  // namespace gridtalk::session
