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

#include "gridtalk/eda.hpp"

#include <map>

#include "gridtalk/error.hpp"
#include "gridtalk/text.hpp"

namespace gridtalk::clarify {

namespace {

const std::map<std::string, std::vector<std::string>, std::less<>>& table() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> kTable = {
      {"place", {"put", "set", "add"}},
      {"put", {"place", "set"}},
      {"add", {"place", "put"}},
      {"build", {"construct", "make", "create"}},
      {"make", {"build", "create"}},
      {"remove", {"destroy", "break", "delete"}},
      {"destroy", {"remove", "break"}},
      {"break", {"remove", "destroy"}},
      {"block", {"cube", "box"}},
      {"blocks", {"cubes", "boxes"}},
      {"row", {"line"}},
      {"line", {"row"}},
      {"tower", {"column", "stack"}},
      {"column", {"tower", "stack"}},
      {"stack", {"tower", "column"}},
      {"top", {"above"}},
      {"above", {"over"}},
      {"below", {"under", "beneath"}},
      {"under", {"below", "beneath"}},
      {"next", {"adjacent"}},
      {"highest", {"tallest", "topmost"}},
      {"lowest", {"bottom"}},
      {"left", {"leftmost"}},
      {"right", {"rightmost"}},
      {"big", {"large"}},
      {"small", {"little"}},
      {"side", {"edge"}},
      {"near", {"beside", "by"}},
      {"which", {"what"}},
      {"where", {"in", "which", "place"}},
  };
  return kTable;
}

}  // namespace

const std::vector<std::string>& synonyms(std::string_view word) {
  static const std::vector<std::string> kNone;
  auto it = table().find(to_lower(word));
  return it == table().end() ? kNone : it->second;
}

std::string eda_augment(std::string_view text, double alpha, std::uint64_t seed, const EdaOps& ops) {
  if (alpha < 0.0 || alpha > 1.0) throw Error(Errc::InvalidArgument, "alpha must be in [0, 1]");
  if (alpha == 0.0) return std::string(text);
  auto words = split_whitespace(text);
  if (words.empty()) return std::string(text);
  Rng rng(seed);

  if (ops.synonym_replacement) {
    for (auto& w : words) {
      const auto& syn = synonyms(w);
      if (!syn.empty() && rng.bernoulli(alpha)) w = syn[rng.below(syn.size())];
    }
  }
  if (ops.random_insertion) {
    const std::size_t n = words.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!rng.bernoulli(alpha)) continue;
      std::vector<std::string> candidates;
      for (const auto& w : words) {
        for (const auto& s : synonyms(w)) candidates.push_back(s);
      }
      if (candidates.empty()) continue;
      const auto& pick = candidates[rng.below(candidates.size())];
      words.insert(words.begin() + static_cast<long>(rng.below(words.size() + 1)), pick);
    }
  }
  if (ops.random_swap && words.size() > 1) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (rng.bernoulli(alpha)) std::swap(words[i], words[rng.below(words.size())]);
    }
  }
  if (ops.random_deletion) {
    std::vector<std::string> kept;
    for (auto& w : words) {
      if (!rng.bernoulli(alpha)) kept.push_back(std::move(w));
    }
    if (kept.empty()) {
      // Deletion never empties the text: keep one original word.
      auto original = split_whitespace(text);
      kept.push_back(original[rng.below(original.size())]);
    }
    words = std::move(kept);
  }
  return join(words, " ");
}

}  // namespace gridtalk::clarify
