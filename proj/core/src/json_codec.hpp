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

// nlohmann/json bindings shared by the .cpp files. Kept out of the public
// headers so consumers of the installed library do not need the json header.

#include <json.hpp>

#include <string>

#include "gridtalk/error.hpp"
#include "gridtalk/voxel.hpp"

namespace gridtalk::codec {

using Json = nlohmann::ordered_json;

Json position_to_json(const voxel::Position& p);
voxel::Position position_from_json(const Json& j);

Json blocks_to_json(const voxel::VoxelWorld& world);
voxel::VoxelWorld blocks_from_json(const Json& j);

Json agent_to_json(const voxel::AgentState& agent);
voxel::AgentState agent_from_json(const Json& j);

Json action_to_json(const voxel::Action& a);
voxel::Action action_from_json(const Json& j);

Json actions_to_json(const std::vector<voxel::Action>& steps);
std::vector<voxel::Action> actions_from_json(const Json& j);

/// Throws SchemaError when `key` is missing.
const Json& require(const Json& j, const char* key);

/// Parses one JSON document, mapping parser failures to ParseError.
Json parse(std::string_view text, std::size_t line = 0);

}  // namespace gridtalk::codec
