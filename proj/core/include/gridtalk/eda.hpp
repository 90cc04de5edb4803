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
#include <string>
#include <string_view>
#include <vector>

namespace gridtalk::clarify {

struct EdaOps {
  bool synonym_replacement = true;
  bool random_insertion = true;
  bool random_swap = true;
  bool random_deletion = true;
};

/// Easy Data Augmentation over whitespace tokens. Each enabled operation
/// fires independently per word with probability `alpha`, in the order
/// replacement, insertion, swap, deletion. Synonyms come from a small
/// built-in table of building vocabulary. A non-empty input never yields an
/// empty output; alpha = 0 returns the input untouched.
std::string eda_augment(std::string_view text, double alpha, std::uint64_t seed, const EdaOps& ops = {});

/// Synonyms the augmenter may substitute for `word` (lowercase lookup).
const std::vector<std::string>& synonyms(std::string_view word);

}  // namespace gridtalk::clarify
