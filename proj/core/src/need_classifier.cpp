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

#include "gridtalk/need_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gridtalk/error.hpp"
#include "gridtalk/text.hpp"
#include "gridtalk/verbalizer.hpp"
#include "json_codec.hpp"

namespace gridtalk::clarify {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_loss(double z, double y) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
}

}  // namespace

std::string NeedClassifier::input_text(const LabeledInstruction& item, const WorldCatalog& worlds) const {
  if (!config_.use_world_prefix) return item.instruction;
  return verbal::verbalize_world(lookup_world(worlds, item.world_id)) + " " + item.instruction;
}

double NeedClassifier::logit(const FeatureVector& fv) const {
  double z = bias_;
  for (const auto& [id, v] : fv.entries) z += weights_[id] * v;
  return z;
}

double NeedClassifier::probability(const LabeledInstruction& item, const WorldCatalog& worlds) const {
  return sigmoid(logit(featurize(input_text(item, worlds)).normalized()));
}

NeedClassifier NeedClassifier::train(const std::vector<LabeledInstruction>& data, const WorldCatalog& worlds,
                                     const NeedClassifierConfig& config) {
  bool has_clear = false, has_ambiguous = false;
  for (const auto& d : data) (d.label == Label::Clear ? has_clear : has_ambiguous) = true;
  if (!has_clear || !has_ambiguous) throw Error(Errc::DegenerateData, "training data needs both labels");
  if (config.batch_size <= 0 || config.max_epochs <= 0) {
    throw Error(Errc::InvalidArgument, "batch size and epochs must be positive");
  }

  NeedClassifier model;
  model.config_ = config;

  // Canonical order first, then seed-controlled shuffles.
  std::vector<const LabeledInstruction*> sorted;
  for (const auto& d : data) sorted.push_back(&d);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  std::vector<FeatureVector> features;
  std::vector<double> labels;
  for (const auto* d : sorted) {
    features.push_back(featurize(model.input_text(*d, worlds)).normalized());
    labels.push_back(d->label == Label::Ambiguous ? 1.0 : 0.0);
  }

  Rng rng(config.seed);
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  double previous = INFINITY;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double scale = config.learning_rate / static_cast<double>(end - start);
      // Gradient of the batch is taken at the pre-batch weights.
      std::map<std::uint32_t, double> updates;
      double bias_step = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& fv = features[order[i]];
        const double g = sigmoid(model.logit(fv)) - labels[order[i]];
        for (const auto& [id, v] : fv.entries) updates[id] += g * v;
        bias_step += g;
      }
      // L2 decay is applied once per touched weight per batch.
      for (const auto& [id, g] : updates) {
        model.weights_[id] -= scale * (g + config.l2 * model.weights_[id]);
      }
      model.bias_ -= scale * bias_step;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) total += log_loss(model.logit(features[i]), labels[i]);
    total /= static_cast<double>(features.size());
    model.epochs_ = epoch + 1;
    if (!std::isfinite(total)) throw Error(Errc::NonFiniteLoss, "need classifier diverged");
    // Minibatch noise can raise the loss slightly; only a flat epoch counts as converged.
    if (std::abs(previous - total) < config.tolerance) break;
    previous = total;
  }
  return model;
}

Checkpoint NeedClassifier::to_checkpoint() const {
  codec::Json j;
  j["use_world_prefix"] = config_.use_world_prefix;
  j["learning_rate"] = config_.learning_rate;
  j["l2"] = config_.l2;
  j["batch_size"] = config_.batch_size;
  j["max_epochs"] = config_.max_epochs;
  j["tolerance"] = config_.tolerance;
  j["seed"] = config_.seed;
  j["epochs_run"] = epochs_;
  Tensor w({kFeatureSpace});
  w.data = weights_;
  Tensor b({1});
  b.data[0] = bias_;
  return Checkpoint{"need-classifier", j.dump(), {{"weights", std::move(w)}, {"bias", std::move(b)}}};
}

NeedClassifier NeedClassifier::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "need-classifier") throw Error(Errc::BadCheckpoint, "not a need-classifier checkpoint");
  auto j = codec::parse(ckpt.config);
  NeedClassifier m;
  m.config_.use_world_prefix = codec::require(j, "use_world_prefix").get<bool>();
  m.config_.learning_rate = codec::require(j, "learning_rate").get<double>();
  m.config_.l2 = codec::require(j, "l2").get<double>();
  m.config_.batch_size = codec::require(j, "batch_size").get<int>();
  m.config_.max_epochs = codec::require(j, "max_epochs").get<int>();
  m.config_.tolerance = codec::require(j, "tolerance").get<double>();
  m.config_.seed = codec::require(j, "seed").get<std::uint64_t>();
  m.epochs_ = codec::require(j, "epochs_run").get<int>();
  const auto& w = ckpt.get("weights");
  if (w.size() != kFeatureSpace) throw Error(Errc::ShapeMismatch, "weights must have 2^18 entries");
  m.weights_ = w.data;
  m.bias_ = ckpt.get("bias").data.at(0);
  return m;
}

}  // namespace gridtalk::clarify
