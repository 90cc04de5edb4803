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

#include "gridtalk/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "gridtalk/clarification.hpp"
#include "gridtalk/error.hpp"
#include "gridtalk/text.hpp"

namespace gridtalk::clarify {

void validate(const LabeledInstruction& item) {
  if (item.instruction.empty()) {
    throw Error(Errc::ValidationError, "record '" + item.id + "' has an empty instruction");
  }
  if (item.label == Label::Ambiguous && item.questions.empty()) {
    throw Error(Errc::ValidationError,
                "record '" + item.id + "' is ambiguous but has no clarifying question");
  }
}

const voxel::VoxelWorld& lookup_world(const WorldCatalog& worlds, const std::string& id) {
  auto it = worlds.find(id);
  if (it == worlds.end()) throw Error(Errc::UnknownWorld, "unknown world '" + id + "'");
  return it->second;
}

double FeatureVector::norm() const noexcept {
  double s = 0.0;
  for (const auto& [id, v] : entries) s += v * v;
  return std::sqrt(s);
}

FeatureVector FeatureVector::normalized() const {
  FeatureVector out = *this;
  const double n = norm();
  if (n > 0.0) {
    for (auto& [id, v] : out.entries) v /= n;
  }
  return out;
}

std::uint32_t unigram_id(std::string_view token) noexcept {
  std::string key = "u\x1f";
  key += token;
  return static_cast<std::uint32_t>(fnv1a64(key) & (kFeatureSpace - 1));
}

std::uint32_t bigram_id(std::string_view first, std::string_view second) noexcept {
  std::string key = "b\x1f";
  key += first;
  key += '\x1f';
  key += second;
  return static_cast<std::uint32_t>(fnv1a64(key) & (kFeatureSpace - 1));
}

FeatureVector featurize(std::string_view text) {
  auto tokens = tokenize_words(text);
  std::map<std::uint32_t, double> counts;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    counts[unigram_id(tokens[i])] += 1.0;
    if (i + 1 < tokens.size()) counts[bigram_id(tokens[i], tokens[i + 1])] += 1.0;
  }
  FeatureVector fv;
  fv.entries.assign(counts.begin(), counts.end());
  return fv;
}

}  // namespace gridtalk::clarify
