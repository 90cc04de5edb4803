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

#include "gridtalk/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gridtalk/error.hpp"
#include "gridtalk/text.hpp"

namespace gridtalk::clarify {

QuestionPool::QuestionPool(std::vector<Question> questions) : questions_(std::move(questions)) {
  for (std::size_t i = 0; i < questions_.size(); ++i) {
    if (!index_.emplace(questions_[i].id, i).second) {
      throw Error(Errc::InvalidArgument, "duplicate question id '" + questions_[i].id + "'");
    }
  }
}

bool QuestionPool::contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }

const Question& QuestionPool::at(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error(Errc::InvalidArgument, "unknown question id '" + std::string(id) + "'");
  return questions_[it->second];
}

Bm25Index::Bm25Index(const QuestionPool& pool, double k1, double b) : pool_(&pool), k1_(k1), b_(b) {
  if (pool.empty()) throw Error(Errc::EmptyPool, "cannot rank against an empty pool");
  double total = 0.0;
  for (const auto& q : pool.questions()) {
    auto toks = tokenize_words(q.text);
    std::unordered_map<std::string, int> tf;
    for (auto& t : toks) ++tf[t];
    for (const auto& [t, n] : tf) ++df_[t];
    length_.push_back(static_cast<double>(toks.size()));
    total += static_cast<double>(toks.size());
    tf_.push_back(std::move(tf));
  }
  avgdl_ = total / static_cast<double>(pool.size());
}

std::vector<double> Bm25Index::scores(std::string_view query) const {
  const double n_docs = static_cast<double>(tf_.size());
  std::vector<double> out(tf_.size(), 0.0);
  for (const auto& t : tokenize_words(query)) {
    auto dit = df_.find(t);
    if (dit == df_.end()) continue;
    const double n = dit->second;
    const double idf = std::log(1.0 + (n_docs - n + 0.5) / (n + 0.5));
    for (std::size_t d = 0; d < tf_.size(); ++d) {
      auto it = tf_[d].find(t);
      if (it == tf_[d].end()) continue;
      const double f = it->second;
      const double norm = avgdl_ > 0.0 ? length_[d] / avgdl_ : 0.0;
      out[d] += idf * f * (k1_ + 1.0) / (f + k1_ * (1.0 - b_ + b_ * norm));
    }
  }
  return out;
}

std::vector<std::string> Bm25Index::rank(std::string_view query) const {
  return order_by_score(*pool_, scores(query));
}

std::vector<std::string> order_by_score(const QuestionPool& pool, const std::vector<double>& scores) {
  const auto& qs = pool.questions();
  std::vector<std::size_t> order(qs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return qs[a].id < qs[b].id;
  });
  std::vector<std::string> ids;
  ids.reserve(order.size());
  for (auto i : order) ids.push_back(qs[i].id);
  return ids;
}

std::vector<std::string> bm25_rank(std::string_view query, const QuestionPool& pool, double k1, double b) {
  return Bm25Index(pool, k1, b).rank(query);
}

std::vector<std::string> color_postfilter(std::string_view instruction, const voxel::VoxelWorld& world,
                                          const std::vector<std::string>& ranking, const QuestionPool& pool,
                                          PostfilterMode mode) {
  if (mode == PostfilterMode::Off) return ranking;
  std::set<std::string> allowed;
  for (const auto& t : tokenize_words(instruction)) {
    if (voxel::parse_color(t)) allowed.insert(t);
  }
  for (const auto& p : world.blocks()) allowed.insert(std::string(voxel::color_name(*world.at(p))));

  std::vector<std::string> kept;
  std::vector<std::string> demoted;
  for (const auto& id : ranking) {
    bool foreign = false;
    for (const auto& t : tokenize_words(pool.at(id).text)) {
      if (voxel::parse_color(t) && !allowed.count(t)) {
        foreign = true;
        break;
      }
    }
    (foreign ? demoted : kept).push_back(id);
  }
  if (mode == PostfilterMode::Demote) kept.insert(kept.end(), demoted.begin(), demoted.end());
  return kept;
}

}  // namespace gridtalk::clarify
