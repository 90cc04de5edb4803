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

#include <map>
#include <string>
#include <vector>

#include "gridtalk/voxel.hpp"

namespace gridtalk::clarify {

/// World snapshots keyed by id (the object-store digest in corpora).
using WorldCatalog = std::map<std::string, voxel::VoxelWorld>;

enum class Label { Clear, Ambiguous };

struct LabeledInstruction {
  std::string id;
  std::string instruction;
  std::string world_id;
  Label label = Label::Clear;
  std::vector<std::string> questions;

  friend bool operator==(const LabeledInstruction&, const LabeledInstruction&) = default;
};

/// Throws ValidationError for an empty instruction or an ambiguous record
/// without a clarifying question.
void validate(const LabeledInstruction& item);

/// Looks up `id`, throwing UnknownWorld.
const voxel::VoxelWorld& lookup_world(const WorldCatalog& worlds, const std::string& id);

}  // namespace gridtalk::clarify
