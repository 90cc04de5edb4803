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

#include "gridtalk/structure.hpp"

#include <cstdlib>
#include <tuple>
#include <vector>

namespace gridtalk::structure {

using voxel::kCellCount;
using voxel::Position;
using voxel::VoxelWorld;

namespace {

// Flood fill from every grounded block; anything left unvisited floats.
bool has_floating_component(const VoxelWorld& world) {
  std::vector<char> seen(kCellCount, 0);
  std::vector<Position> stack;
  for (const auto& p : world.blocks()) {
    if (p.y == 0) {
      seen[voxel::cell_index(p)] = 1;
      stack.push_back(p);
    }
  }
  while (!stack.empty()) {
    Position p = stack.back();
    stack.pop_back();
    for (const auto& off : voxel::kFaceOffsets) {
      Position q = p + off;
      if (!world.occupied(q)) continue;
      auto& s = seen[voxel::cell_index(q)];
      if (!s) {
        s = 1;
        stack.push_back(q);
      }
    }
  }
  for (const auto& p : world.blocks()) {
    if (!seen[voxel::cell_index(p)]) return true;
  }
  return false;
}

bool has_edge_diagonal(const VoxelWorld& world) {
  static constexpr std::array<Position, 4> kHorizontal = {
      Position{1, 0, 0}, Position{-1, 0, 0}, Position{0, 0, 1}, Position{0, 0, -1}};
  for (const auto& p : world.blocks()) {
    // Looking upward only visits each vertical pair once.
    for (const auto& h : kHorizontal) {
      Position q = p + h + Position{0, 1, 0};
      if (!world.occupied(q)) continue;
      if (!world.occupied(p + h) && !world.occupied(p + Position{0, 1, 0})) return true;
    }
  }
  return false;
}

bool has_hidden_block(const VoxelWorld& world) {
  for (const auto& p : world.blocks()) {
    bool covered = true;
    for (const auto& off : voxel::kFaceOffsets) {
      Position q = p + off;
      if (voxel::in_bounds(q) && !world.occupied(q)) {
        covered = false;
        break;
      }
    }
    if (covered) return true;
  }
  return false;
}

}  // namespace

StructureLabels classify_structure(const VoxelWorld& world, const ClassifyOptions& opts) {
  auto blocks = world.blocks();
  if (blocks.empty()) throw Error(Errc::EmptyWorld, "cannot classify an empty world");
  StructureLabels labels;
  labels.flat = true;
  int max_y = 0;
  for (const auto& p : blocks) {
    if (p.y != 0) labels.flat = false;
    max_y = std::max(max_y, p.y);
  }
  labels.tall = max_y > opts.tall_above_level;
  labels.flying = has_floating_component(world);
  labels.diagonal = has_edge_diagonal(world);
  labels.tricky = has_hidden_block(world);
  return labels;
}

VoxelWorld shift_world(const VoxelWorld& world, int dx, int dz) {
  VoxelWorld out;
  for (const auto& p : world.blocks()) {
    Position q{p.x + dx, p.y, p.z + dz};
    if (voxel::in_bounds(q)) out.set(q, world.at(p));
  }
  return out;
}

MatchReport match(const VoxelWorld& world, const VoxelWorld& target) {
  const auto& tc = target.cells();
  const auto built = world.blocks();
  const int target_blocks = target.block_count();

  MatchReport best;
  bool have_best = false;
  auto better = [](int cost, int dx, int dz, int best_cost, int bdx, int bdz) {
    auto key = [](int c, int x, int z) {
      return std::make_tuple(c, !(x == 0 && z == 0), std::abs(x) + std::abs(z), x, z);
    };
    return key(cost, dx, dz) < key(best_cost, bdx, bdz);
  };

  for (int dx = -kMaxShift; dx <= kMaxShift; ++dx) {
    for (int dz = -kMaxShift; dz <= kMaxShift; ++dz) {
      int matched = 0;
      int extra = 0;
      for (const auto& p : built) {
        Position q{p.x + dx, p.y, p.z + dz};
        if (voxel::in_bounds(q) && tc[voxel::cell_index(q)] == world.cells()[voxel::cell_index(p)]) {
          ++matched;
        } else {
          ++extra;
        }
      }
      int missing = target_blocks - matched;
      int cost = missing + extra;
      if (!have_best || better(cost, dx, dz, best.missing + best.extra, best.dx, best.dz)) {
        have_best = true;
        best.dx = dx;
        best.dz = dz;
        best.missing = missing;
        best.extra = extra;
      }
    }
  }
  best.exact = world == target;
  best.translated_match = best.missing == 0 && best.extra == 0;
  return best;
}

}  // namespace gridtalk::structure
