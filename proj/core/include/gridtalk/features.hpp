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
#include <string_view>
#include <utility>
#include <vector>

namespace gridtalk::clarify {

inline constexpr std::uint32_t kFeatureBits = 18;
inline constexpr std::uint32_t kFeatureSpace = 1u << kFeatureBits;

/// Hashed unigram and bigram counts, sorted by feature id.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  double norm() const noexcept;
  /// Copy scaled to unit L2 norm (unchanged when empty).
  FeatureVector normalized() const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

std::uint32_t unigram_id(std::string_view token) noexcept;
std::uint32_t bigram_id(std::string_view first, std::string_view second) noexcept;

/// Featurizes `tokenize_words(text)`.
FeatureVector featurize(std::string_view text);

}  // namespace gridtalk::clarify
