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

#include "gridtalk/error.hpp"

namespace gridtalk {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::CellOccupied: return "CellOccupied";
    case Errc::CellEmpty: return "CellEmpty";
    case Errc::OutOfReach: return "OutOfReach";
    case Errc::Unsupported: return "Unsupported";
    case Errc::CorruptLog: return "CorruptLog";
    case Errc::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
    case Errc::EmptyWorld: return "EmptyWorld";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyPool: return "EmptyPool";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::UnknownTarget: return "UnknownTarget";
    case Errc::UnknownWorld: return "UnknownWorld";
    case Errc::UnknownGame: return "UnknownGame";
    case Errc::WrongTurn: return "WrongTurn";
    case Errc::StaleVersion: return "StaleVersion";
    case Errc::AuthFailure: return "AuthFailure";
    case Errc::RejectedText: return "RejectedText";
    case Errc::IllegalActions: return "IllegalActions";
    case Errc::MissingQuestion: return "MissingQuestion";
    case Errc::MissingRebuild: return "MissingRebuild";
    case Errc::InvalidPayload: return "InvalidPayload";
    case Errc::IoError: return "IoError";
    case Errc::BadCheckpoint: return "BadCheckpoint";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message,
             std::optional<std::size_t> step, std::optional<Errc> cause)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code),
      step_(step),
      cause_(cause) {}

}  // namespace gridtalk
