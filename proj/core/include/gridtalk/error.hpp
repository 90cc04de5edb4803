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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gridtalk {

enum class Errc {
  // voxel environment
  OutOfBounds,
  CellOccupied,
  CellEmpty,
  OutOfReach,
  Unsupported,
  CorruptLog,
  NonMonotoneTimestamp,
  // structure analysis / verbalizer
  EmptyWorld,
  // fusion network
  ShapeMismatch,
  NonFiniteLoss,
  // clarification pipelines
  DegenerateData,
  LengthMismatch,
  EmptyPool,
  EmptyInput,
  // dataset io
  ParseError,
  SchemaError,
  ValidationError,
  EmptyCorpus,
  // session service
  UnknownTarget,
  UnknownWorld,
  UnknownGame,
  WrongTurn,
  StaleVersion,
  AuthFailure,
  RejectedText,
  IllegalActions,
  MissingQuestion,
  MissingRebuild,
  InvalidPayload,
  // generic
  IoError,
  BadCheckpoint,
  InvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

/// Library-wide exception. `code()` names the violated rule; `step()` is set
/// for errors raised while validating a sequence of actions (1-based), and
/// `cause()` carries the underlying rule when the error wraps another one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message,
        std::optional<std::size_t> step = std::nullopt,
        std::optional<Errc> cause = std::nullopt);

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> step() const noexcept { return step_; }
  std::optional<Errc> cause() const noexcept { return cause_; }

 private:
  Errc code_;
  std::optional<std::size_t> step_;
  std::optional<Errc> cause_;
};

}  // namespace gridtalk
