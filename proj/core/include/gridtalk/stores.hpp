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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace gridtalk::session {

/// Content-addressed, write-once blob storage. Addresses are SHA-256 hex
/// digests of the stored bytes, so identical writes are no-ops and two
/// different blobs can never share an address.
class ObjectStore {
 public:
  virtual ~ObjectStore() = default;

  /// Stores `bytes` and returns its address.
  virtual std::string put(std::string_view bytes) = 0;
  /// Throws UnknownWorld when the address is absent.
  virtual std::string get(std::string_view digest) const = 0;
  virtual bool contains(std::string_view digest) const = 0;
  virtual std::vector<std::string> list() const = 0;
};

class MemoryObjectStore final : public ObjectStore {
 public:
  std::string put(std::string_view bytes) override;
  std::string get(std::string_view digest) const override;
  bool contains(std::string_view digest) const override;
  std::vector<std::string> list() const override;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::string, std::less<>> blobs_;
};

/// One file per blob under `root/<first two hex digits>/<digest>`. Writes go
/// through a temporary file and a rename so readers never see partial blobs.
class FileObjectStore final : public ObjectStore {
 public:
  explicit FileObjectStore(std::filesystem::path root);

  std::string put(std::string_view bytes) override;
  std::string get(std::string_view digest) const override;
  bool contains(std::string_view digest) const override;
  std::vector<std::string> list() const override;

  std::filesystem::path path_of(std::string_view digest) const;

 private:
  std::filesystem::path root_;
  mutable std::mutex write_mu_;
};

enum class GameMode { MultiTurn, SingleTurnBuild, SingleTurnJudge };
enum class SessionStatus { Open, AwaitingArchitect, AwaitingBuilder, Complete };

std::string_view mode_name(GameMode m) noexcept;
GameMode parse_mode(std::string_view s);
std::string_view status_name(SessionStatus s) noexcept;
SessionStatus parse_status(std::string_view s);

struct GameRow {
  std::string id;
  GameMode mode = GameMode::MultiTurn;
  std::string target_id;
  /// Object-store address of the starting snapshot.
  std::string initial_world;
  std::string architect_key_digest;
  std::string builder_key_digest;
  std::int64_t created_ms = 0;

  friend bool operator==(const GameRow&, const GameRow&) = default;
};

enum class TurnKind { Instruction, Question, Actions, Judgment, Completion };

std::string_view turn_kind_name(TurnKind k) noexcept;
TurnKind parse_turn_kind(std::string_view s);

/// One row of the game's turn relation. Instructions and questions carry
/// text; action turns reference the stored log and resulting snapshot.
struct TurnRow {
  std::string game_id;
  std::size_t turn = 0;
  TurnKind kind = TurnKind::Instruction;
  std::string text;
  std::string log_digest;
  std::string world_digest;
  /// Judgment only.
  std::optional<bool> clear;
  std::vector<std::string> questions;
  bool over_time = false;
  std::int64_t at_ms = 0;

  friend bool operator==(const TurnRow&, const TurnRow&) = default;
};

/// Relational side of persistence: games plus their turns.
///
/// Turn indices are dense from 0 per game and rows may only reference known
/// games; both rules are enforced on insert.
class TablesStore {
 public:
  virtual ~TablesStore() = default;

  /// Throws InvalidArgument on a duplicate id.
  virtual void insert_game(const GameRow& game) = 0;
  /// Throws UnknownGame or InvalidArgument (gap or reused index).
  virtual void insert_turn(const TurnRow& turn) = 0;

  virtual std::optional<GameRow> game(std::string_view id) const = 0;
  virtual std::vector<GameRow> games() const = 0;
  virtual std::vector<TurnRow> turns(std::string_view game_id) const = 0;
};

class MemoryTablesStore : public TablesStore {
 public:
  void insert_game(const GameRow& game) override;
  void insert_turn(const TurnRow& turn) override;
  std::optional<GameRow> game(std::string_view id) const override;
  std::vector<GameRow> games() const override;
  std::vector<TurnRow> turns(std::string_view game_id) const override;

 protected:
  void check_game(const GameRow& game) const;
  void check_turn(const TurnRow& turn) const;

  mutable std::shared_mutex mu_;
  std::vector<std::string> order_;
  std::map<std::string, GameRow, std::less<>> games_;
  std::map<std::string, std::vector<TurnRow>, std::less<>> turns_;
};

/// Append-only JSON-lines journal plus the in-memory index. Opening an
/// existing journal replays it; a torn final line (crash mid-append) is
/// ignored, any other malformed line throws ParseError.
class JournalTablesStore final : public MemoryTablesStore {
 public:
  explicit JournalTablesStore(std::filesystem::path journal);

  void insert_game(const GameRow& game) override;
  void insert_turn(const TurnRow& turn) override;

 private:
  void append_line(const std::string& line);

  std::filesystem::path path_;
};

std::string game_row_to_json(const GameRow& g);
std::string turn_row_to_json(const TurnRow& t);

}  // namespace gridtalk::session
