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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gridtalk/error.hpp"

namespace gridtalk::voxel {

inline constexpr int kSizeX = 11;
inline constexpr int kSizeY = 9;
inline constexpr int kSizeZ = 11;
inline constexpr int kCellCount = kSizeX * kSizeY * kSizeZ;
inline constexpr int kColorCount = 6;
/// Empty plus the six block colors.
inline constexpr int kChannelCount = kColorCount + 1;

/// Values double as one-hot channel indices (0 is the empty channel).
enum class BlockColor : std::uint8_t {
  Blue = 1,
  Green = 2,
  Red = 3,
  Orange = 4,
  Purple = 5,
  Yellow = 6,
};

inline constexpr std::array<BlockColor, kColorCount> kAllColors = {
    BlockColor::Blue,   BlockColor::Green,  BlockColor::Red,
    BlockColor::Orange, BlockColor::Purple, BlockColor::Yellow};

std::string_view color_name(BlockColor c) noexcept;
std::optional<BlockColor> parse_color(std::string_view name) noexcept;

struct Position {
  int x = 0;
  int y = 0;  // level, 0 = ground
  int z = 0;

  friend bool operator==(const Position&, const Position&) = default;
  friend auto operator<=>(const Position&, const Position&) = default;
};

constexpr bool in_bounds(const Position& p) noexcept {
  return p.x >= 0 && p.x < kSizeX && p.y >= 0 && p.y < kSizeY && p.z >= 0 && p.z < kSizeZ;
}

/// Row-major cell index with x slowest, then y, then z.
constexpr int cell_index(const Position& p) noexcept {
  return (p.x * kSizeY + p.y) * kSizeZ + p.z;
}

constexpr Position cell_position(int index) noexcept {
  return Position{index / (kSizeY * kSizeZ), (index / kSizeZ) % kSizeY, index % kSizeZ};
}

inline constexpr std::array<Position, 6> kFaceOffsets = {
    Position{1, 0, 0},  Position{-1, 0, 0}, Position{0, 1, 0},
    Position{0, -1, 0}, Position{0, 0, 1},  Position{0, 0, -1}};

constexpr Position operator+(Position a, Position b) noexcept {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}

/// Dense 11x9x11 grid of optional colored blocks.
class VoxelWorld {
 public:
  VoxelWorld() { cells_.fill(0); }

  std::optional<BlockColor> at(const Position& p) const;
  bool occupied(const Position& p) const { return in_bounds(p) && cells_[cell_index(p)] != 0; }

  /// Writes a cell. Bumps `version()` only when the content changes.
  void set(const Position& p, std::optional<BlockColor> color);

  std::uint64_t version() const noexcept { return version_; }
  int block_count() const noexcept;
  bool empty() const noexcept { return block_count() == 0; }
  /// Occupied positions in cell-index order.
  std::vector<Position> blocks() const;

  /// Raw channel bytes (0 = empty, 1..6 = color) in cell-index order.
  const std::array<std::uint8_t, kCellCount>& cells() const noexcept { return cells_; }

  /// SHA-256 over cell contents only.
  std::string content_digest() const;

  /// Content equality; versions are ignored.
  friend bool operator==(const VoxelWorld& a, const VoxelWorld& b) noexcept {
    return a.cells_ == b.cells_;
  }

 private:
  std::array<std::uint8_t, kCellCount> cells_{};
  std::uint64_t version_ = 0;
};

enum class Direction : std::uint8_t { North, South, East, West };

std::string_view direction_code(Direction d) noexcept;  // "N", "S", "E", "W"
std::optional<Direction> parse_direction(std::string_view code) noexcept;
/// North is -z, south +z, east +x, west -x.
Position direction_offset(Direction d) noexcept;

struct AgentState {
  Position position{5, 0, 5};
  Direction facing = Direction::North;
  /// Set by Jump; lifts the reach origin for the next Place/Break only.
  bool lifted = false;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct Place {
  Position pos;
  BlockColor color;
  friend bool operator==(const Place&, const Place&) = default;
};
struct Break {
  Position pos;
  friend bool operator==(const Break&, const Break&) = default;
};
struct Move {
  Direction dir;
  friend bool operator==(const Move&, const Move&) = default;
};
struct Jump {
  friend bool operator==(const Jump&, const Jump&) = default;
};

struct Action {
  std::int64_t t_ms = 0;
  std::variant<Place, Break, Move, Jump> kind;

  friend bool operator==(const Action&, const Action&) = default;
};

struct Rules {
  double reach = 3.0;
  /// Disables the face-adjacency support requirement for Place.
  bool free_placement = false;
};

struct State {
  VoxelWorld world;
  AgentState agent;
};

/// Checks `a` against the rules without mutating anything. Returns the
/// violated rule, or nothing when the action is legal.
std::optional<Errc> check_action(const VoxelWorld& world, const AgentState& agent,
                                 const Action& a, const Rules& rules = {});

/// Applies `a` in place. Throws gridtalk::Error naming the violated rule;
/// state is untouched on error.
void apply_action_inplace(State& state, const Action& a, const Rules& rules = {});

/// Value-returning form of apply_action_inplace.
State apply_action(const VoxelWorld& world, const AgentState& agent, const Action& a,
                   const Rules& rules = {});

/// Distance between cell centers, from the agent's (possibly lifted) origin.
double reach_distance(const AgentState& agent, const Position& target) noexcept;

struct CellChange {
  Position pos;
  std::optional<BlockColor> before;
  std::optional<BlockColor> after;
  friend bool operator==(const CellChange&, const CellChange&) = default;
};

/// Minimal cell-wise difference in cell-index order.
std::vector<CellChange> diff_worlds(const VoxelWorld& a, const VoxelWorld& b);
void apply_diff(VoxelWorld& world, const std::vector<CellChange>& diff);

/// Canonical snapshot text: {"blocks":[[x,y,z,"color"],...]} in cell-index order.
std::string world_to_json(const VoxelWorld& world);
VoxelWorld world_from_json(std::string_view text);

/// Ordered, timestamped actions from an initial snapshot.
///
/// Logs built through `append` are legal by construction. `parse_jsonl`
/// does not validate; `replay` reports tampering as CorruptLog.
class ActionLog {
 public:
  ActionLog() = default;
  ActionLog(VoxelWorld initial, AgentState agent, Rules rules = {});

  /// Validates and appends. Throws the violated rule (with the 1-based step
  /// index set) and leaves the log unchanged.
  void append(const Action& a);

  const VoxelWorld& initial_world() const noexcept { return initial_; }
  const AgentState& initial_agent() const noexcept { return agent_; }
  const std::vector<Action>& steps() const noexcept { return steps_; }
  const Rules& rules() const noexcept { return rules_; }
  /// State after the last appended step.
  const State& tail() const noexcept { return tail_; }
  /// Last minus first timestamp; 0 for fewer than two steps.
  std::int64_t duration_ms() const noexcept;

  /// Header line plus one line per action, each terminated by '\n'.
  std::string to_jsonl() const;
  static ActionLog parse_jsonl(std::string_view text, Rules rules = {});

  /// Builds a log from untrusted parts without validation.
  static ActionLog unchecked(VoxelWorld initial, AgentState agent, std::vector<Action> steps,
                             Rules rules = {});

  /// Replays every step; throws IllegalActions with the failing 1-based step
  /// and the underlying rule as cause.
  void validate() const;

  friend bool operator==(const ActionLog& a, const ActionLog& b) {
    return a.initial_ == b.initial_ && a.agent_ == b.agent_ && a.steps_ == b.steps_;
  }

 private:
  VoxelWorld initial_;
  AgentState agent_;
  Rules rules_;
  std::vector<Action> steps_;
  State tail_;
};

/// Deterministic replay. Throws CorruptLog if any step is illegal.
State replay(const ActionLog& log);

}  // namespace gridtalk::voxel
