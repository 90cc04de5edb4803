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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gridtalk/voxel.hpp"

namespace gridtalk::verbal {

struct LevelSummary {
  int level = 0;
  std::map<voxel::BlockColor, int> counts;

  friend bool operator==(const LevelSummary&, const LevelSummary&) = default;
};

/// Per-level color histogram of the occupied levels, ascending by level.
std::vector<LevelSummary> level_histogram(const voxel::VoxelWorld& world);

/// Level-wise description:
///
///   There are <L> levels. There are <N> different blocks.
///   At level 0, there are <list>. Above at level <k>, there are <list>. ...
///
/// List items are "<count> <color>", ordered by descending count; equal counts
/// keep the order in which the colors first occur when scanning the level in
/// cell-index order (x, then z). Lists of three or more use an Oxford comma,
/// and the trailing noun agrees with the last count.
std::string verbalize_world(const voxel::VoxelWorld& world);

/// Recovers the per-level histogram from a description. Accepts the
/// canonical "Above at level k" form plus the ordinal "Above the 1st level"
/// variant. Throws ParseError on text outside that grammar or on totals that
/// disagree with the listed counts.
std::vector<LevelSummary> parse_verbalization(std::string_view text);

/// "state: There are nine green blocks" for one color chosen uniformly (by
/// seed) among the colors present. Throws EmptyWorld.
std::string state_line(const voxel::VoxelWorld& world, std::uint64_t seed);

}  // namespace gridtalk::verbal
