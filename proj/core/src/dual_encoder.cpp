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

#include "gridtalk/dual_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gridtalk/eda.hpp"
#include "gridtalk/error.hpp"
#include "gridtalk/text.hpp"
#include "gridtalk/verbalizer.hpp"
#include "json_codec.hpp"

namespace gridtalk::clarify {

namespace {
constexpr int kQuerySide = 0;
constexpr int kQuestionSide = 1;
}  // namespace

std::string dual_query_text(std::string_view instruction, const voxel::VoxelWorld& world, std::uint64_t seed) {
  return verbal::state_line(world, seed) + "; instruction: " + std::string(instruction);
}

DualEncoder::DualEncoder(DualEncoderConfig config) : config_(config) {
  if (config_.dim <= 0 || config_.negatives < 0 || config_.steps < 0) {
    throw Error(Errc::InvalidArgument, "dual encoder sizes must be non-negative");
  }
}

std::vector<double> DualEncoder::initial_row(int side, std::uint32_t feature) const {
  Rng rng(mix_seed(config_.seed, (static_cast<std::uint64_t>(side) << 32) | feature));
  std::vector<double> row(static_cast<std::size_t>(config_.dim));
  for (auto& v : row) v = rng.uniform(-config_.init_scale, config_.init_scale);
  return row;
}

std::vector<double>& DualEncoder::query_row(std::uint32_t feature) {
  auto it = query_rows_.find(feature);
  if (it == query_rows_.end()) it = query_rows_.emplace(feature, initial_row(kQuerySide, feature)).first;
  return it->second;
}

std::vector<double>& DualEncoder::question_row(std::uint32_t feature) {
  auto it = question_rows_.find(feature);
  if (it == question_rows_.end()) it = question_rows_.emplace(feature, initial_row(kQuestionSide, feature)).first;
  return it->second;
}

std::vector<double> DualEncoder::embed(const FeatureVector& fv, int side) const {
  const auto& rows = side == kQuerySide ? query_rows_ : question_rows_;
  std::vector<double> out(static_cast<std::size_t>(config_.dim), 0.0);
  for (const auto& [id, w] : fv.entries) {
    auto it = rows.find(id);
    const std::vector<double> fresh = it == rows.end() ? initial_row(side, id) : std::vector<double>{};
    const auto& row = it == rows.end() ? fresh : it->second;
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += w * row[c];
  }
  return out;
}

std::vector<double> DualEncoder::embed_query(std::string_view text) const {
  return embed(featurize(text).normalized(), kQuerySide);
}

std::vector<double> DualEncoder::embed_question(std::string_view text) const {
  return embed(featurize(text).normalized(), kQuestionSide);
}

double DualEncoder::score(std::string_view query, std::string_view question) const {
  auto q = embed_query(query);
  auto p = embed_question(question);
  double s = 0.0;
  for (std::size_t c = 0; c < q.size(); ++c) s += q[c] * p[c];
  return s;
}

std::vector<std::string> DualEncoder::rank(std::string_view query, const QuestionPool& pool) const {
  if (pool.empty()) throw Error(Errc::EmptyPool, "cannot rank against an empty pool");
  auto q = embed_query(query);
  std::vector<double> scores;
  for (const auto& cand : pool.questions()) {
    auto p = embed_question(cand.text);
    double s = 0.0;
    for (std::size_t c = 0; c < q.size(); ++c) s += q[c] * p[c];
    scores.push_back(s);
  }
  return order_by_score(pool, scores);
}

std::vector<TrainingList> DualEncoder::make_lists(const std::vector<RankingExample>& data,
                                                  const QuestionPool& pool) const {
  Rng rng(mix_seed(config_.seed, 0x6e656773ULL));
  std::vector<TrainingList> lists;
  for (const auto& ex : data) {
    TrainingList list;
    list.query = featurize(ex.query).normalized();
    list.candidates.push_back(featurize(pool.at(ex.gold_id).text).normalized());
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool.questions()[i].id != ex.gold_id) others.push_back(i);
    }
    rng.shuffle(others);
    const std::size_t m = std::min(others.size(), static_cast<std::size_t>(config_.negatives));
    for (std::size_t i = 0; i < m; ++i) {
      list.candidates.push_back(featurize(pool.questions()[others[i]].text).normalized());
    }
    lists.push_back(std::move(list));
  }
  return lists;
}

double DualEncoder::listwise_loss(const std::vector<TrainingList>& lists, DualGradient* grad) const {
  if (lists.empty()) throw Error(Errc::EmptyInput, "no training lists");
  const std::size_t dim = static_cast<std::size_t>(config_.dim);
  const double inv = 1.0 / static_cast<double>(lists.size());
  double total = 0.0;
  for (const auto& list : lists) {
    auto q = embed(list.query, kQuerySide);
    std::vector<std::vector<double>> ps;
    std::vector<double> logits;
    for (const auto& c : list.candidates) {
      ps.push_back(embed(c, kQuestionSide));
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += q[k] * ps.back()[k];
      logits.push_back(s);
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double s : logits) z += std::exp(s - mx);
    total += -(logits[0] - mx - std::log(z));
    if (!grad) continue;

    std::vector<double> dq(dim, 0.0);
    for (std::size_t j = 0; j < logits.size(); ++j) {
      const double ds = (std::exp(logits[j] - mx) / z - (j == 0 ? 1.0 : 0.0)) * inv;
      for (std::size_t k = 0; k < dim; ++k) dq[k] += ds * ps[j][k];
      for (const auto& [id, w] : list.candidates[j].entries) {
        auto& row = grad->question[id];
        row.resize(dim, 0.0);
        for (std::size_t k = 0; k < dim; ++k) row[k] += ds * w * q[k];
      }
    }
    for (const auto& [id, w] : list.query.entries) {
      auto& row = grad->query[id];
      row.resize(dim, 0.0);
      for (std::size_t k = 0; k < dim; ++k) row[k] += w * dq[k];
    }
  }
  return total * inv;
}

void DualEncoder::apply(const DualGradient& grad, double learning_rate) {
  for (const auto& [id, g] : grad.query) {
    auto& row = query_row(id);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] -= learning_rate * g[k];
  }
  for (const auto& [id, g] : grad.question) {
    auto& row = question_row(id);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] -= learning_rate * g[k];
  }
}

DualEncoder DualEncoder::train(const std::vector<RankingExample>& data, const QuestionPool& pool,
                               const DualEncoderConfig& config, std::vector<double>* loss_history) {
  std::set<std::string> golds;
  for (const auto& ex : data) {
    if (!pool.contains(ex.gold_id)) throw Error(Errc::InvalidArgument, "gold '" + ex.gold_id + "' not in pool");
    golds.insert(ex.gold_id);
  }
  if (golds.size() < 2) throw Error(Errc::DegenerateData, "need at least two distinct gold questions");

  std::vector<RankingExample> examples = data;
  std::stable_sort(examples.begin(), examples.end(), [](const auto& a, const auto& b) {
    return std::tie(a.gold_id, a.query) < std::tie(b.gold_id, b.query);
  });
  for (int c = 0; c < config.eda_copies; ++c) {
    const std::size_t n = examples.size();
    for (std::size_t i = 0; i < n; ++i) {
      auto seed = mix_seed(config.seed, (static_cast<std::uint64_t>(c) << 32) | i);
      examples.push_back({eda_augment(examples[i].query, config.eda_alpha, seed), examples[i].gold_id});
    }
  }

  DualEncoder model(config);
  auto lists = model.make_lists(examples, pool);
  for (int step = 0; step < config.steps; ++step) {
    DualGradient grad;
    const double l = model.listwise_loss(lists, &grad);
    if (!std::isfinite(l)) throw Error(Errc::NonFiniteLoss, "dual encoder diverged");
    if (loss_history) loss_history->push_back(l);
    model.apply(grad, config.learning_rate);
  }
  return model;
}

Checkpoint DualEncoder::to_checkpoint() const {
  codec::Json j;
  j["dim"] = config_.dim;
  j["negatives"] = config_.negatives;
  j["learning_rate"] = config_.learning_rate;
  j["steps"] = config_.steps;
  j["init_scale"] = config_.init_scale;
  j["seed"] = config_.seed;
  j["eda_alpha"] = config_.eda_alpha;
  j["eda_copies"] = config_.eda_copies;
  auto pack = [&](const std::map<std::uint32_t, std::vector<double>>& rows, const std::string& prefix) {
    Tensor ids({rows.size()});
    Tensor values({rows.size(), static_cast<std::size_t>(config_.dim)});
    std::size_t r = 0;
    for (const auto& [id, row] : rows) {
      ids.data[r] = static_cast<double>(id);
      std::copy(row.begin(), row.end(), values.data.begin() + static_cast<long>(r * row.size()));
      ++r;
    }
    return std::vector<NamedTensor>{{prefix + ".ids", std::move(ids)}, {prefix + ".rows", std::move(values)}};
  };
  Checkpoint c{"dual-encoder", j.dump(), {}};
  for (auto& t : pack(query_rows_, "query")) c.tensors.push_back(std::move(t));
  for (auto& t : pack(question_rows_, "question")) c.tensors.push_back(std::move(t));
  return c;
}

DualEncoder DualEncoder::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "dual-encoder") throw Error(Errc::BadCheckpoint, "not a dual-encoder checkpoint");
  auto j = codec::parse(ckpt.config);
  DualEncoderConfig cfg;
  cfg.dim = codec::require(j, "dim").get<int>();
  cfg.negatives = codec::require(j, "negatives").get<int>();
  cfg.learning_rate = codec::require(j, "learning_rate").get<double>();
  cfg.steps = codec::require(j, "steps").get<int>();
  cfg.init_scale = codec::require(j, "init_scale").get<double>();
  cfg.seed = codec::require(j, "seed").get<std::uint64_t>();
  cfg.eda_alpha = codec::require(j, "eda_alpha").get<double>();
  cfg.eda_copies = codec::require(j, "eda_copies").get<int>();
  DualEncoder m(cfg);
  auto unpack = [&](const std::string& prefix, std::map<std::uint32_t, std::vector<double>>& rows) {
    const auto& ids = ckpt.get(prefix + ".ids");
    const auto& values = ckpt.get(prefix + ".rows");
    const auto dim = static_cast<std::size_t>(cfg.dim);
    if (values.size() != ids.size() * dim) throw Error(Errc::ShapeMismatch, "embedding rows do not match ids");
    for (std::size_t r = 0; r < ids.size(); ++r) {
      auto begin = values.data.begin() + static_cast<long>(r * dim);
      rows[static_cast<std::uint32_t>(ids.data[r])] = std::vector<double>(begin, begin + static_cast<long>(dim));
    }
  };
  unpack("query", m.query_rows_);
  unpack("question", m.question_rows_);
  return m;
}

}  // namespace gridtalk::clarify
