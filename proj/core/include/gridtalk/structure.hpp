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

#include "gridtalk/voxel.hpp"

namespace gridtalk::structure {

struct StructureLabels {
  bool flat = false;
  bool flying = false;
  bool diagonal = false;
  bool tricky = false;
  bool tall = false;

  friend bool operator==(const StructureLabels&, const StructureLabels&) = default;
};

struct ClassifyOptions {
  /// Highest level a ground-standing agent reaches; anything above is tall.
  int tall_above_level = 3;
};

/// Five-way structure labeling:
///   flat     every block is on level 0
///   flying   some face-connected component never touches level 0
///   diagonal two blocks one level apart and one cell apart horizontally whose
///            two shared face-neighbors are both empty (edge contact only)
///   tricky   some block has all six face-neighbors occupied or off-grid
///   tall     some block sits above `tall_above_level`
/// Throws EmptyWorld for a world without blocks.
StructureLabels classify_structure(const voxel::VoxelWorld& world, const ClassifyOptions& opts = {});

struct MatchReport {
  bool exact = false;
  bool translated_match = false;
  int dx = 0;
  int dz = 0;
  /// Target blocks not reproduced at the best shift.
  int missing = 0;
  /// Built blocks the target does not contain at the best shift.
  int extra = 0;

  friend bool operator==(const MatchReport&, const MatchReport&) = default;
};

/// Largest horizontal shift searched by `match`.
inline constexpr int kMaxShift = 10;

/// Compares a built world against a target, also under horizontal shifts of
/// the built world by (dx, dz) with |dx|,|dz| <= 10. The best shift minimizes
/// missing + extra, preferring (0,0), then the smallest |dx|+|dz|, then the
/// lexicographically smallest (dx, dz).
MatchReport match(const voxel::VoxelWorld& world, const voxel::VoxelWorld& target);

/// Shifts every block by (dx, 0, dz); blocks leaving the grid are dropped.
voxel::VoxelWorld shift_world(const voxel::VoxelWorld& world, int dx, int dz);

}  // namespace gridtalk::structure
