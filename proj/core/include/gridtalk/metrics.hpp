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
#include <span>
#include <string>
#include <vector>

namespace gridtalk::clarify {

/// F1 of the positive (ambiguous) class; 0 when precision + recall is 0.
/// Throws LengthMismatch / EmptyInput.
double f1_score(std::span<const bool> predictions, std::span<const bool> labels);

struct RankedQuery {
  std::vector<std::string> ranking;
  std::string gold;
};

/// Mean of 1/rank(gold) with ranks beyond `k` (or a missing gold) scoring 0.
double mrr_at_k(std::span<const RankedQuery> queries, std::size_t k = 20);

}  // namespace gridtalk::clarify
