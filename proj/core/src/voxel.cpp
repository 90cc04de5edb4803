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

#include "gridtalk/voxel.hpp"

#include <cmath>

#include "gridtalk/digest.hpp"
#include "json_codec.hpp"

namespace gridtalk::voxel {

std::string_view color_name(BlockColor c) noexcept {
  switch (c) {
    case BlockColor::Blue: return "blue";
    case BlockColor::Green: return "green";
    case BlockColor::Red: return "red";
    case BlockColor::Orange: return "orange";
    case BlockColor::Purple: return "purple";
    case BlockColor::Yellow: return "yellow";
  }
  return "?";
}

std::optional<BlockColor> parse_color(std::string_view name) noexcept {
  for (auto c : kAllColors) {
    if (color_name(c) == name) return c;
  }
  return std::nullopt;
}

std::optional<BlockColor> VoxelWorld::at(const Position& p) const {
  if (!in_bounds(p)) throw Error(Errc::OutOfBounds, "cell outside the 11x9x11 grid");
  auto v = cells_[cell_index(p)];
  if (v == 0) return std::nullopt;
  return static_cast<BlockColor>(v);
}

void VoxelWorld::set(const Position& p, std::optional<BlockColor> color) {
  if (!in_bounds(p)) throw Error(Errc::OutOfBounds, "cell outside the 11x9x11 grid");
  std::uint8_t v = color ? static_cast<std::uint8_t>(*color) : 0;
  auto& cell = cells_[cell_index(p)];
  if (cell != v) {
    cell = v;
    ++version_;
  }
}

int VoxelWorld::block_count() const noexcept {
  int n = 0;
  for (auto v : cells_) n += v != 0;
  return n;
}

std::vector<Position> VoxelWorld::blocks() const {
  std::vector<Position> out;
  for (int i = 0; i < kCellCount; ++i) {
    if (cells_[i] != 0) out.push_back(cell_position(i));
  }
  return out;
}

std::string VoxelWorld::content_digest() const {
  return sha256_hex(std::string_view(reinterpret_cast<const char*>(cells_.data()), cells_.size()));
}

std::string_view direction_code(Direction d) noexcept {
  switch (d) {
    case Direction::North: return "N";
    case Direction::South: return "S";
    case Direction::East: return "E";
    case Direction::West: return "W";
  }
  return "?";
}

std::optional<Direction> parse_direction(std::string_view code) noexcept {
  if (code == "N") return Direction::North;
  if (code == "S") return Direction::South;
  if (code == "E") return Direction::East;
  if (code == "W") return Direction::West;
  return std::nullopt;
}

Position direction_offset(Direction d) noexcept {
  switch (d) {
    case Direction::North: return {0, 0, -1};
    case Direction::South: return {0, 0, 1};
    case Direction::East: return {1, 0, 0};
    case Direction::West: return {-1, 0, 0};
  }
  return {};
}

double reach_distance(const AgentState& agent, const Position& target) noexcept {
  const double dx = target.x - agent.position.x;
  const double dy = target.y - (agent.position.y + (agent.lifted ? 1 : 0));
  const double dz = target.z - agent.position.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

namespace {

bool has_face_neighbor(const VoxelWorld& world, const Position& p) {
  for (const auto& off : kFaceOffsets) {
    if (world.occupied(p + off)) return true;
  }
  return false;
}

bool supported_at(const VoxelWorld& world, const Position& p) {
  return p.y == 0 || world.occupied(p + Position{0, -1, 0});
}

/// Resolves where a Move ends, or the violated rule.
std::variant<Position, Errc> move_target(const VoxelWorld& world, const AgentState& agent,
                                         Direction dir) {
  Position dest = agent.position + direction_offset(dir);
  if (!in_bounds(dest)) return Errc::OutOfBounds;
  if (!world.occupied(dest)) {
    if (!supported_at(world, dest)) return Errc::Unsupported;
    return dest;
  }
  // Step up one level onto the blocking cell.
  Position up = dest + Position{0, 1, 0};
  if (!in_bounds(up)) return Errc::OutOfBounds;
  if (world.occupied(up)) return Errc::CellOccupied;
  return up;
}

}  // namespace

std::optional<Errc> check_action(const VoxelWorld& world, const AgentState& agent,
                                 const Action& a, const Rules& rules) {
  return std::visit(
      [&](const auto& k) -> std::optional<Errc> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Place>) {
          if (!in_bounds(k.pos)) return Errc::OutOfBounds;
          if (world.occupied(k.pos) || k.pos == agent.position) return Errc::CellOccupied;
          if (reach_distance(agent, k.pos) > rules.reach) return Errc::OutOfReach;
          if (!rules.free_placement && k.pos.y != 0 && !has_face_neighbor(world, k.pos)) {
            return Errc::Unsupported;
          }
          return std::nullopt;
        } else if constexpr (std::is_same_v<K, Break>) {
          if (!in_bounds(k.pos)) return Errc::OutOfBounds;
          if (!world.occupied(k.pos)) return Errc::CellEmpty;
          if (reach_distance(agent, k.pos) > rules.reach) return Errc::OutOfReach;
          if (k.pos == agent.position + Position{0, -1, 0}) return Errc::Unsupported;
          return std::nullopt;
        } else if constexpr (std::is_same_v<K, Move>) {
          auto r = move_target(world, agent, k.dir);
          if (auto* e = std::get_if<Errc>(&r)) return *e;
          return std::nullopt;
        } else {
          return std::nullopt;
        }
      },
      a.kind);
}

void apply_action_inplace(State& state, const Action& a, const Rules& rules) {
  if (auto err = check_action(state.world, state.agent, a, rules)) {
    throw Error(*err, "action rejected");
  }
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Place>) {
          state.world.set(k.pos, k.color);
          state.agent.lifted = false;
        } else if constexpr (std::is_same_v<K, Break>) {
          state.world.set(k.pos, std::nullopt);
          state.agent.lifted = false;
        } else if constexpr (std::is_same_v<K, Move>) {
          state.agent.position = std::get<Position>(move_target(state.world, state.agent, k.dir));
          state.agent.facing = k.dir;
          state.agent.lifted = false;
        } else {
          state.agent.lifted = true;
        }
      },
      a.kind);
}

State apply_action(const VoxelWorld& world, const AgentState& agent, const Action& a,
                   const Rules& rules) {
  State s{world, agent};
  apply_action_inplace(s, a, rules);
  return s;
}

std::vector<CellChange> diff_worlds(const VoxelWorld& a, const VoxelWorld& b) {
  std::vector<CellChange> out;
  const auto& ca = a.cells();
  const auto& cb = b.cells();
  for (int i = 0; i < kCellCount; ++i) {
    if (ca[i] == cb[i]) continue;
    auto decode = [](std::uint8_t v) -> std::optional<BlockColor> {
      if (v == 0) return std::nullopt;
      return static_cast<BlockColor>(v);
    };
    out.push_back({cell_position(i), decode(ca[i]), decode(cb[i])});
  }
  return out;
}

void apply_diff(VoxelWorld& world, const std::vector<CellChange>& diff) {
  for (const auto& c : diff) world.set(c.pos, c.after);
}

std::string world_to_json(const VoxelWorld& world) {
  codec::Json j;
  j["blocks"] = codec::blocks_to_json(world);
  return j.dump();
}

VoxelWorld world_from_json(std::string_view text) {
  auto j = codec::parse(text);
  return codec::blocks_from_json(codec::require(j, "blocks"));
}

}  // namespace gridtalk::voxel
