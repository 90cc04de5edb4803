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

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gridtalk/voxel.hpp"

namespace gridtalk::clarify {

struct Question {
  std::string id;
  std::string text;
  friend bool operator==(const Question&, const Question&) = default;
};

/// Candidate clarifying questions with unique ids.
class QuestionPool {
 public:
  QuestionPool() = default;
  /// Throws InvalidArgument on duplicate ids.
  explicit QuestionPool(std::vector<Question> questions);

  const std::vector<Question>& questions() const noexcept { return questions_; }
  std::size_t size() const noexcept { return questions_.size(); }
  bool empty() const noexcept { return questions_.empty(); }
  bool contains(std::string_view id) const;
  /// Throws InvalidArgument for unknown ids.
  const Question& at(std::string_view id) const;

 private:
  std::vector<Question> questions_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Okapi BM25 over `tokenize_words` tokens with document statistics taken
/// from the pool:
///
///   score(q, D) = sum over query tokens t of
///       idf(t) * f(t,D) * (k1 + 1) / (f(t,D) + k1 * (1 - b + b * |D| / avgdl))
///   idf(t) = ln(1 + (N - n(t) + 0.5) / (n(t) + 0.5))
///
/// Repeated query tokens contribute once per occurrence.
class Bm25Index {
 public:
  /// Throws EmptyPool.
  explicit Bm25Index(const QuestionPool& pool, double k1 = 1.2, double b = 0.75);

  std::vector<double> scores(std::string_view query) const;
  /// Pool ids by descending score; ties broken by ascending id.
  std::vector<std::string> rank(std::string_view query) const;

 private:
  const QuestionPool* pool_;
  double k1_;
  double b_;
  double avgdl_ = 0.0;
  std::vector<std::unordered_map<std::string, int>> tf_;
  std::vector<double> length_;
  std::unordered_map<std::string, int> df_;
};

std::vector<std::string> bm25_rank(std::string_view query, const QuestionPool& pool, double k1 = 1.2,
                                   double b = 0.75);

enum class PostfilterMode { Off, Demote, Strict };

/// Moves candidates that mention a block color absent from both the
/// instruction and the world to the tail (Demote) or drops them (Strict).
/// Relative order within each group is preserved. Candidates that mention
/// no color are always kept in place.
std::vector<std::string> color_postfilter(std::string_view instruction, const voxel::VoxelWorld& world,
                                          const std::vector<std::string>& ranking, const QuestionPool& pool,
                                          PostfilterMode mode = PostfilterMode::Demote);

/// Orders ids by descending score, ties by ascending id.
std::vector<std::string> order_by_score(const QuestionPool& pool, const std::vector<double>& scores);

}  // namespace gridtalk::clarify
