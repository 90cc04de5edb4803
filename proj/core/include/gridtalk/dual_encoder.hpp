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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gridtalk/checkpoint.hpp"
#include "gridtalk/features.hpp"
#include "gridtalk/ranking.hpp"

namespace gridtalk::clarify {

struct DualEncoderConfig {
  int dim = 32;
  /// Sampled negatives per training list (one gold plus `negatives`).
  int negatives = 7;
  double learning_rate = 2.0;
  int steps = 150;
  double init_scale = 0.3;
  std::uint64_t seed = 1;
  /// EDA on query texts before training; 0 copies disables augmentation.
  double eda_alpha = 0.1;
  int eda_copies = 0;
};

struct RankingExample {
  /// Already formatted, e.g. "state: There are nine green blocks; instruction: ...".
  std::string query;
  std::string gold_id;
};

/// `state_line(world, seed) + "; instruction: " + instruction`.
std::string dual_query_text(std::string_view instruction, const voxel::VoxelWorld& world, std::uint64_t seed);

/// One list-wise training item: candidates[0] is the gold question.
struct TrainingList {
  FeatureVector query;
  std::vector<FeatureVector> candidates;
};

/// Sparse gradient rows keyed by feature id.
struct DualGradient {
  std::map<std::uint32_t, std::vector<double>> query;
  std::map<std::uint32_t, std::vector<double>> question;
};

/// Two linear maps from hashed features into a shared embedding space,
/// scored by dot product and trained with a list-wise softmax loss.
///
/// Rows not yet touched by training are generated from (seed, side, feature)
/// so an untrained model scores deterministically.
class DualEncoder {
 public:
  explicit DualEncoder(DualEncoderConfig config);

  /// Samples negatives once per example, then runs full-batch gradient
  /// descent for `config.steps` steps. Throws DegenerateData when fewer than
  /// two distinct gold questions are present.
  static DualEncoder train(const std::vector<RankingExample>& data, const QuestionPool& pool,
                           const DualEncoderConfig& config, std::vector<double>* loss_history = nullptr);

  /// Builds the training lists `train` uses for `data`.
  std::vector<TrainingList> make_lists(const std::vector<RankingExample>& data, const QuestionPool& pool) const;

  /// Mean of -log softmax(gold) over `lists`; fills `grad` when non-null.
  double listwise_loss(const std::vector<TrainingList>& lists, DualGradient* grad) const;
  void apply(const DualGradient& grad, double learning_rate);

  std::vector<double> embed_query(std::string_view text) const;
  std::vector<double> embed_question(std::string_view text) const;
  double score(std::string_view query, std::string_view question) const;
  std::vector<std::string> rank(std::string_view query, const QuestionPool& pool) const;

  /// Materialized embedding row (for inspection and gradient checks).
  std::vector<double>& query_row(std::uint32_t feature);
  std::vector<double>& question_row(std::uint32_t feature);

  const DualEncoderConfig& config() const noexcept { return config_; }

  Checkpoint to_checkpoint() const;
  static DualEncoder from_checkpoint(const Checkpoint& ckpt);

 private:
  std::vector<double> initial_row(int side, std::uint32_t feature) const;
  std::vector<double> embed(const FeatureVector& fv, int side) const;

  DualEncoderConfig config_;
  std::map<std::uint32_t, std::vector<double>> query_rows_;
  std::map<std::uint32_t, std::vector<double>> question_rows_;
};

}  // namespace gridtalk::clarify
