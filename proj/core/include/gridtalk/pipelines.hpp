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

#include "gridtalk/dataset.hpp"
#include "gridtalk/dual_encoder.hpp"
#include "gridtalk/fusion.hpp"
#include "gridtalk/need_classifier.hpp"
#include "gridtalk/ranking.hpp"

namespace gridtalk::clarify {

/// An ambiguous instruction whose first question is a pool candidate.
struct RankingQuery {
  std::string id;
  std::string instruction;
  std::string world_id;
  std::string gold_id;
};

/// Ambiguous samples whose first question text appears in the pool.
std::vector<RankingQuery> ranking_queries(const std::vector<dataset::SingleTurnSample>& samples,
                                          const QuestionPool& pool);

/// Deterministic split: items are ordered by a seeded hash of their id and
/// the first `round(fraction * n)` go to the training side.
template <typename T>
struct Split {
  std::vector<T> train;
  std::vector<T> test;
};

Split<LabeledInstruction> split_items(const std::vector<LabeledInstruction>& items, double train_fraction,
                                      std::uint64_t seed);
Split<RankingQuery> split_items(const std::vector<RankingQuery>& items, double train_fraction, std::uint64_t seed);

/// Held-out F1 of the ambiguous class.
double evaluate_need(const NeedClassifier& model, const std::vector<LabeledInstruction>& items,
                     const WorldCatalog& worlds);

struct RankingOptions {
  PostfilterMode postfilter = PostfilterMode::Off;
  int k = 20;
  /// Seed of the state line added to dual-encoder queries.
  std::uint64_t state_seed = 0;
};

double evaluate_bm25(const std::vector<RankingQuery>& queries, const QuestionPool& pool, const WorldCatalog& worlds,
                     const RankingOptions& opts = {});

std::vector<RankingExample> dual_examples(const std::vector<RankingQuery>& queries, const WorldCatalog& worlds,
                                          std::uint64_t state_seed = 0);

double evaluate_dual(const DualEncoder& model, const std::vector<RankingQuery>& queries, const QuestionPool& pool,
                     const WorldCatalog& worlds, const RankingOptions& opts = {});

/// Pool files hold one {"id", "text"} object per line.
QuestionPool parse_pool(std::string_view jsonl);
std::string pool_to_jsonl(const QuestionPool& pool);

}  // namespace gridtalk::clarify

namespace gridtalk::fusion {

DialogueString dialogue_of(const dataset::DialogueExample& ex);

/// Encodes worlds and tokenizes rendered dialogues with `vocab`.
std::vector<Example> make_examples(const std::vector<dataset::DialogueExample>& data, const Vocabulary& vocab);

}  // namespace gridtalk::fusion
