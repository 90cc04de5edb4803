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

#include "gridtalk/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

#include "gridtalk/metrics.hpp"
#include "gridtalk/text.hpp"
#include "json_codec.hpp"

namespace gridtalk::clarify {

std::vector<RankingQuery> ranking_queries(const std::vector<dataset::SingleTurnSample>& samples,
                                          const QuestionPool& pool) {
  std::map<std::string, std::string> by_text;
  for (const auto& q : pool.questions()) by_text.emplace(q.text, q.id);
  std::vector<RankingQuery> out;
  for (const auto& s : samples) {
    if (s.clear || s.questions.empty()) continue;
    auto it = by_text.find(s.questions.front());
    if (it == by_text.end()) continue;
    out.push_back({s.id, s.instruction, s.world_id, it->second});
  }
  return out;
}

namespace {

template <typename T>
Split<T> split_by_id(const std::vector<T>& items, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error(Errc::InvalidArgument, "train fraction must be in [0, 1]");
  std::vector<std::pair<std::uint64_t, const T*>> keyed;
  for (const auto& it : items) keyed.push_back({mix_seed(seed, fnv1a64(it.id)), &it});
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second->id < b.second->id;
  });
  const auto cut = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(items.size())));
  Split<T> out;
  for (std::size_t i = 0; i < keyed.size(); ++i) (i < cut ? out.train : out.test).push_back(*keyed[i].second);
  return out;
}

}  // namespace

Split<LabeledInstruction> split_items(const std::vector<LabeledInstruction>& items, double train_fraction,
                                      std::uint64_t seed) {
  return split_by_id(items, train_fraction, seed);
}

Split<RankingQuery> split_items(const std::vector<RankingQuery>& items, double train_fraction, std::uint64_t seed) {
  return split_by_id(items, train_fraction, seed);
}

double evaluate_need(const NeedClassifier& model, const std::vector<LabeledInstruction>& items,
                     const WorldCatalog& worlds) {
  // std::vector<bool> is not contiguous, so stage the labels in plain arrays.
  const std::size_t n = items.size();
  auto pred = std::make_unique<bool[]>(n);
  auto gold = std::make_unique<bool[]>(n);
  for (std::size_t i = 0; i < n; ++i) {
    pred[i] = model.predict_ambiguous(items[i], worlds);
    gold[i] = items[i].label == Label::Ambiguous;
  }
  return f1_score(std::span<const bool>(pred.get(), n), std::span<const bool>(gold.get(), n));
}

double evaluate_bm25(const std::vector<RankingQuery>& queries, const QuestionPool& pool, const WorldCatalog& worlds,
                     const RankingOptions& opts) {
  Bm25Index index(pool);
  std::vector<RankedQuery> ranked;
  for (const auto& q : queries) {
    auto ranking = index.rank(q.instruction);
    if (opts.postfilter != PostfilterMode::Off) {
      ranking = color_postfilter(q.instruction, lookup_world(worlds, q.world_id), ranking, pool, opts.postfilter);
    }
    ranked.push_back({std::move(ranking), q.gold_id});
  }
  return mrr_at_k(ranked, static_cast<std::size_t>(std::max(opts.k, 0)));
}

std::vector<RankingExample> dual_examples(const std::vector<RankingQuery>& queries, const WorldCatalog& worlds,
                                          std::uint64_t state_seed) {
  std::vector<RankingExample> out;
  for (const auto& q : queries) {
    out.push_back({dual_query_text(q.instruction, lookup_world(worlds, q.world_id), state_seed), q.gold_id});
  }
  return out;
}

double evaluate_dual(const DualEncoder& model, const std::vector<RankingQuery>& queries, const QuestionPool& pool,
                     const WorldCatalog& worlds, const RankingOptions& opts) {
  std::vector<RankedQuery> ranked;
  for (const auto& q : queries) {
    const auto& world = lookup_world(worlds, q.world_id);
    auto ranking = model.rank(dual_query_text(q.instruction, world, opts.state_seed), pool);
    if (opts.postfilter != PostfilterMode::Off) {
      ranking = color_postfilter(q.instruction, world, ranking, pool, opts.postfilter);
    }
    ranked.push_back({std::move(ranking), q.gold_id});
  }
  return mrr_at_k(ranked, static_cast<std::size_t>(std::max(opts.k, 0)));
}

QuestionPool parse_pool(std::string_view jsonl) {
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  std::vector<Question> qs;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = codec::parse(line, lineno);
    try {
      qs.push_back({codec::require(j, "id").get<std::string>(), codec::require(j, "text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::SchemaError, "line " + std::to_string(lineno) + ": " + e.what(), lineno);
    }
  }
  return QuestionPool(std::move(qs));
}

std::string pool_to_jsonl(const QuestionPool& pool) {
  std::string out;
  for (const auto& q : pool.questions()) {
    codec::Json j;
    j["id"] = q.id;
    j["text"] = q.text;
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace gridtalk::clarify

namespace gridtalk::fusion {

DialogueString dialogue_of(const dataset::DialogueExample& ex) {
  DialogueString d;
  for (const auto& [role, text] : ex.turns) {
    d.turns.push_back({role == dataset::Role::Architect ? Role::Architect : Role::Builder, text});
  }
  return d;
}

std::vector<Example> make_examples(const std::vector<dataset::DialogueExample>& data, const Vocabulary& vocab) {
  std::vector<Example> out;
  for (const auto& ex : data) {
    out.push_back({one_hot_encode(ex.world), vocab.encode(dialogue_of(ex).render()), ex.label});
  }
  return out;
}

}  // namespace gridtalk::fusion
