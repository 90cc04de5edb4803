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

#include "gridtalk/stores.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gridtalk/checkpoint.hpp"
#include "gridtalk/digest.hpp"
#include "gridtalk/error.hpp"
#include "json_codec.hpp"

namespace gridtalk::session {

namespace fs = std::filesystem;

namespace {

bool is_digest(std::string_view s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

[[noreturn]] void unknown_object(std::string_view digest) {
  throw Error(Errc::UnknownWorld, "no object " + std::string(digest));
}

}  // namespace

std::string MemoryObjectStore::put(std::string_view bytes) {
  std::string digest = sha256_hex(bytes);
  std::unique_lock lock(mu_);
  blobs_.try_emplace(digest, bytes);
  return digest;
}

std::string MemoryObjectStore::get(std::string_view digest) const {
  std::shared_lock lock(mu_);
  auto it = blobs_.find(digest);
  if (it == blobs_.end()) unknown_object(digest);
  return it->second;
}

bool MemoryObjectStore::contains(std::string_view digest) const {
  std::shared_lock lock(mu_);
  return blobs_.find(digest) != blobs_.end();
}

std::vector<std::string> MemoryObjectStore::list() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [k, v] : blobs_) out.push_back(k);
  return out;
}

FileObjectStore::FileObjectStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(Errc::IoError, "cannot create object store at " + root_.string());
}

fs::path FileObjectStore::path_of(std::string_view digest) const {
  if (!is_digest(digest)) throw Error(Errc::InvalidArgument, "malformed digest '" + std::string(digest) + "'");
  return root_ / std::string(digest.substr(0, 2)) / std::string(digest);
}

std::string FileObjectStore::put(std::string_view bytes) {
  std::string digest = sha256_hex(bytes);
  const fs::path target = path_of(digest);
  std::lock_guard lock(write_mu_);
  if (fs::exists(target)) return digest;
  fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  write_file(tmp, bytes);
  fs::rename(tmp, target);
  return digest;
}

std::string FileObjectStore::get(std::string_view digest) const {
  const fs::path p = path_of(digest);
  if (!fs::exists(p)) unknown_object(digest);
  return read_file(p);
}

bool FileObjectStore::contains(std::string_view digest) const {
  return is_digest(digest) && fs::exists(path_of(digest));
}

std::vector<std::string> FileObjectStore::list() const {
  std::vector<std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    if (is_digest(name)) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string_view mode_name(GameMode m) noexcept {
  switch (m) {
    case GameMode::MultiTurn: return "multi_turn";
    case GameMode::SingleTurnBuild: return "single_turn_build";
    case GameMode::SingleTurnJudge: return "single_turn_judge";
  }
  return "?";
}

GameMode parse_mode(std::string_view s) {
  for (auto m : {GameMode::MultiTurn, GameMode::SingleTurnBuild, GameMode::SingleTurnJudge}) {
    if (mode_name(m) == s) return m;
  }
  throw Error(Errc::InvalidPayload, "unknown mode '" + std::string(s) + "'");
}

std::string_view status_name(SessionStatus s) noexcept {
  switch (s) {
    case SessionStatus::Open: return "open";
    case SessionStatus::AwaitingArchitect: return "awaiting_architect";
    case SessionStatus::AwaitingBuilder: return "awaiting_builder";
    case SessionStatus::Complete: return "complete";
  }
  return "?";
}

SessionStatus parse_status(std::string_view s) {
  for (auto v : {SessionStatus::Open, SessionStatus::AwaitingArchitect, SessionStatus::AwaitingBuilder,
                 SessionStatus::Complete}) {
    if (status_name(v) == s) return v;
  }
  throw Error(Errc::InvalidPayload, "unknown status '" + std::string(s) + "'");
}

std::string_view turn_kind_name(TurnKind k) noexcept {
  switch (k) {
    case TurnKind::Instruction: return "instruction";
    case TurnKind::Question: return "question";
    case TurnKind::Actions: return "actions";
    case TurnKind::Judgment: return "judgment";
    case TurnKind::Completion: return "completion";
  }
  return "?";
}

TurnKind parse_turn_kind(std::string_view s) {
  for (auto k : {TurnKind::Instruction, TurnKind::Question, TurnKind::Actions, TurnKind::Judgment,
                 TurnKind::Completion}) {
    if (turn_kind_name(k) == s) return k;
  }
  throw Error(Errc::ParseError, "unknown turn kind '" + std::string(s) + "'");
}

void MemoryTablesStore::check_game(const GameRow& game) const {
  if (game.id.empty()) throw Error(Errc::InvalidArgument, "game id must be non-empty");
  if (games_.count(game.id)) throw Error(Errc::InvalidArgument, "duplicate game id " + game.id);
}

void MemoryTablesStore::check_turn(const TurnRow& turn) const {
  auto it = turns_.find(turn.game_id);
  if (it == turns_.end()) throw Error(Errc::UnknownGame, "turn references unknown game " + turn.game_id);
  if (turn.turn != it->second.size()) {
    throw Error(Errc::InvalidArgument, "turn " + std::to_string(turn.turn) + " of game " + turn.game_id +
                                           " breaks the dense index (next is " +
                                           std::to_string(it->second.size()) + ")");
  }
}

void MemoryTablesStore::insert_game(const GameRow& game) {
  std::unique_lock lock(mu_);
  check_game(game);
  games_.emplace(game.id, game);
  turns_.emplace(game.id, std::vector<TurnRow>{});
  order_.push_back(game.id);
}

void MemoryTablesStore::insert_turn(const TurnRow& turn) {
  std::unique_lock lock(mu_);
  check_turn(turn);
  turns_.find(turn.game_id)->second.push_back(turn);
}

std::optional<GameRow> MemoryTablesStore::game(std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = games_.find(id);
  if (it == games_.end()) return std::nullopt;
  return it->second;
}

std::vector<GameRow> MemoryTablesStore::games() const {
  std::shared_lock lock(mu_);
  std::vector<GameRow> out;
  for (const auto& id : order_) out.push_back(games_.find(id)->second);
  return out;
}

std::vector<TurnRow> MemoryTablesStore::turns(std::string_view game_id) const {
  std::shared_lock lock(mu_);
  auto it = turns_.find(game_id);
  if (it == turns_.end()) throw Error(Errc::UnknownGame, "unknown game " + std::string(game_id));
  return it->second;
}

std::string game_row_to_json(const GameRow& g) {
  codec::Json j;
  j["table"] = "games";
  j["id"] = g.id;
  j["mode"] = mode_name(g.mode);
  j["target_id"] = g.target_id;
  j["initial_world"] = g.initial_world;
  j["architect_key"] = g.architect_key_digest;
  j["builder_key"] = g.builder_key_digest;
  j["created_ms"] = g.created_ms;
  return j.dump();
}

std::string turn_row_to_json(const TurnRow& t) {
  codec::Json j;
  j["table"] = "turns";
  j["game_id"] = t.game_id;
  j["turn"] = t.turn;
  j["kind"] = turn_kind_name(t.kind);
  j["text"] = t.text;
  j["log"] = t.log_digest;
  j["world"] = t.world_digest;
  if (t.clear) j["clear"] = *t.clear;
  j["questions"] = t.questions;
  j["over_time"] = t.over_time;
  j["at_ms"] = t.at_ms;
  return j.dump();
}

namespace {

GameRow game_row_from_json(const codec::Json& j) {
  GameRow g;
  g.id = codec::require(j, "id").get<std::string>();
  g.mode = parse_mode(codec::require(j, "mode").get<std::string>());
  g.target_id = codec::require(j, "target_id").get<std::string>();
  g.initial_world = codec::require(j, "initial_world").get<std::string>();
  g.architect_key_digest = codec::require(j, "architect_key").get<std::string>();
  g.builder_key_digest = codec::require(j, "builder_key").get<std::string>();
  g.created_ms = codec::require(j, "created_ms").get<std::int64_t>();
  return g;
}

TurnRow turn_row_from_json(const codec::Json& j) {
  TurnRow t;
  t.game_id = codec::require(j, "game_id").get<std::string>();
  t.turn = codec::require(j, "turn").get<std::size_t>();
  t.kind = parse_turn_kind(codec::require(j, "kind").get<std::string>());
  t.text = codec::require(j, "text").get<std::string>();
  t.log_digest = codec::require(j, "log").get<std::string>();
  t.world_digest = codec::require(j, "world").get<std::string>();
  if (j.contains("clear")) t.clear = j["clear"].get<bool>();
  t.questions = codec::require(j, "questions").get<std::vector<std::string>>();
  t.over_time = codec::require(j, "over_time").get<bool>();
  t.at_ms = codec::require(j, "at_ms").get<std::int64_t>();
  return t;
}

}  // namespace

JournalTablesStore::JournalTablesStore(fs::path journal) : path_(std::move(journal)) {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  if (!fs::exists(path_)) return;
  const std::string content = read_file(path_);
  // A crash mid-append leaves a partial last line; drop it so the next append starts clean.
  const auto keep = content.empty() || content.back() == '\n' ? content.size() : content.rfind('\n') + 1;
  if (keep != content.size()) fs::resize_file(path_, keep);
  std::istringstream in(content.substr(0, keep));
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  for (const auto& text : lines) {
    ++lineno;
    if (text.empty()) continue;
    auto j = codec::parse(text, lineno);
    const auto table = codec::require(j, "table").get<std::string>();
    if (table == "games") {
      MemoryTablesStore::insert_game(game_row_from_json(j));
    } else if (table == "turns") {
      MemoryTablesStore::insert_turn(turn_row_from_json(j));
    } else {
      throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": unknown table '" + table + "'");
    }
  }
}

void JournalTablesStore::append_line(const std::string& line) {
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out) throw Error(Errc::IoError, "cannot append to " + path_.string());
}

void JournalTablesStore::insert_game(const GameRow& game) {
  std::unique_lock lock(mu_);
  check_game(game);
  append_line(game_row_to_json(game));
  games_.emplace(game.id, game);
  turns_.emplace(game.id, std::vector<TurnRow>{});
  order_.push_back(game.id);
}

void JournalTablesStore::insert_turn(const TurnRow& turn) {
  std::unique_lock lock(mu_);
  check_turn(turn);
  append_line(turn_row_to_json(turn));
  turns_.find(turn.game_id)->second.push_back(turn);
}

}  // namespace gridtalk::session
