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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "gridtalk/dataset.hpp"
#include "gridtalk/stores.hpp"
#include "gridtalk/structure.hpp"
#include "gridtalk/voxel.hpp"

namespace gridtalk::session {

struct SessionConfig {
  dataset::CleanOptions clean;
  voxel::Rules rules;
  /// Milliseconds since the epoch; replaceable for deterministic tests.
  std::function<std::int64_t()> clock;
};

enum class RoleKind { Architect, Builder };

/// Snapshot of one session as returned to clients.
struct SessionView {
  std::string game_id;
  GameMode mode = GameMode::MultiTurn;
  SessionStatus status = SessionStatus::Open;
  /// Bumped by every accepted mutation; clients echo it back.
  std::uint64_t version = 0;
  /// Number of snapshots written after the initial one.
  std::uint64_t world_version = 0;
  std::size_t turns = 0;
  std::string target_id;
  std::string world_digest;
  voxel::VoxelWorld world;
};

struct CreatedGame {
  SessionView view;
  std::string architect_key;
  std::string builder_key;
};

struct TurnResult {
  SessionView view;
  TurnRow row;
};

struct CompletionReport {
  SessionView view;
  /// Multi-turn games only.
  std::optional<structure::MatchReport> match;
};

/// A builder turn: either a clarifying question or actions applied from the
/// current snapshot with the given starting agent.
struct BuilderPayload {
  std::optional<std::string> question;
  std::optional<std::vector<voxel::Action>> actions;
  voxel::AgentState agent;
};

struct Judgment {
  bool clear = true;
  std::vector<std::string> questions;
  std::optional<std::vector<voxel::Action>> rebuild;
  voxel::AgentState agent;
};

/// Session lifecycle over a TablesStore and an ObjectStore.
///
/// Modes and their state machines:
///   multi_turn         architect -> builder -> architect ... -> complete
///   single_turn_build  builder (actions) -> architect (instruction) -> complete
///   single_turn_judge  architect (instruction) -> builder (judgment) -> complete
///
/// Every mutation of one game holds that game's lock and, when the caller
/// passes `expected_version`, fails with StaleVersion unless it matches. Of
/// two racing posts for the same turn exactly one therefore succeeds.
class SessionService {
 public:
  SessionService(std::shared_ptr<TablesStore> tables, std::shared_ptr<ObjectStore> objects,
                 SessionConfig config = {});

  /// Multi-turn games need `target_id` (UnknownTarget); single-turn modes
  /// need `world_id` (UnknownWorld). Multi-turn games start from `world_id`
  /// when given, else from an empty world.
  CreatedGame create_game(GameMode mode, const std::optional<std::string>& target_id,
                          const std::optional<std::string>& world_id);

  SessionView state(const std::string& game_id, const std::string& role_key) const;
  RoleKind role_of(const std::string& game_id, const std::string& role_key) const;
  std::vector<TurnRow> turns(const std::string& game_id, const std::string& role_key) const;

  TurnResult post_instruction(const std::string& game_id, const std::string& architect_key, const std::string& text,
                              std::optional<std::uint64_t> expected_version = std::nullopt);
  TurnResult post_builder_turn(const std::string& game_id, const std::string& builder_key,
                               const BuilderPayload& payload,
                               std::optional<std::uint64_t> expected_version = std::nullopt);
  CompletionReport mark_complete(const std::string& game_id, const std::string& architect_key,
                                 std::optional<std::uint64_t> expected_version = std::nullopt);
  TurnResult submit_judgment(const std::string& game_id, const std::string& builder_key, const Judgment& judgment,
                             std::optional<std::uint64_t> expected_version = std::nullopt);

  /// Current session version, if the game exists.
  std::optional<std::uint64_t> version_of(const std::string& game_id) const;

  /// Multi-turn sessions as corpus records.
  std::vector<dataset::GameRecord> export_games() const;
  /// Completed single_turn_judge sessions as corpus records.
  std::vector<dataset::SingleTurnSample> export_samples() const;

  /// Re-checks every stored action log against its recorded base snapshot.
  /// Returns the number of logs checked; throws CorruptLog on the first failure.
  std::size_t audit_logs() const;

  ObjectStore& objects() noexcept { return *objects_; }
  TablesStore& tables() noexcept { return *tables_; }

 private:
  struct Live {
    mutable std::mutex mu;
    GameRow row;
    SessionStatus status = SessionStatus::Open;
    std::uint64_t version = 0;
    std::uint64_t world_version = 0;
    std::size_t turns = 0;
    std::string world_digest;
    voxel::VoxelWorld world;
  };

  std::shared_ptr<Live> find(const std::string& game_id) const;
  RoleKind authenticate(const Live& live, const std::string& key) const;
  void require_role(const Live& live, const std::string& key, RoleKind role) const;
  void check_version(const Live& live, std::optional<std::uint64_t> expected) const;
  SessionView view_of(const Live& live) const;
  TurnRow next_row(const Live& live, TurnKind kind) const;
  voxel::ActionLog build_log(const Live& live, const voxel::AgentState& agent,
                             const std::vector<voxel::Action>& actions) const;
  void restore();
  std::int64_t now() const;

  std::shared_ptr<TablesStore> tables_;
  std::shared_ptr<ObjectStore> objects_;
  SessionConfig config_;
  mutable std::shared_mutex index_mu_;
  std::map<std::string, std::shared_ptr<Live>> live_;
  std::uint64_t next_id_ = 1;
};

}  // namespace gridtalk::session
