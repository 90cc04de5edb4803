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
#include <vector>

#include "gridtalk/checkpoint.hpp"
#include "gridtalk/clarification.hpp"
#include "gridtalk/features.hpp"

namespace gridtalk::clarify {

struct NeedClassifierConfig {
  /// Prefix each instruction with the level-wise world description.
  bool use_world_prefix = false;
  double learning_rate = 2.0;
  double l2 = 1e-5;
  int batch_size = 16;
  int max_epochs = 500;
  /// Stop once the epoch loss improves by less than this.
  double tolerance = 1e-6;
  std::uint64_t seed = 1;
};

/// Logistic regression over hashed n-gram features of
/// [world description ⊕] instruction; positive class = ambiguous.
class NeedClassifier {
 public:
  /// Mini-batch gradient descent over the id-sorted data in seed-shuffled
  /// order, so the result does not depend on input order. Throws
  /// DegenerateData unless both labels are present.
  static NeedClassifier train(const std::vector<LabeledInstruction>& data, const WorldCatalog& worlds,
                              const NeedClassifierConfig& config);

  /// Text fed to the featurizer for `item`.
  std::string input_text(const LabeledInstruction& item, const WorldCatalog& worlds) const;
  double probability(const LabeledInstruction& item, const WorldCatalog& worlds) const;
  bool predict_ambiguous(const LabeledInstruction& item, const WorldCatalog& worlds) const {
    return probability(item, worlds) >= 0.5;
  }

  const NeedClassifierConfig& config() const noexcept { return config_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double bias() const noexcept { return bias_; }
  int epochs_run() const noexcept { return epochs_; }

  Checkpoint to_checkpoint() const;
  static NeedClassifier from_checkpoint(const Checkpoint& ckpt);

 private:
  double logit(const FeatureVector& fv) const;

  NeedClassifierConfig config_;
  std::vector<double> weights_ = std::vector<double>(kFeatureSpace, 0.0);
  double bias_ = 0.0;
  int epochs_ = 0;
};

}  // namespace gridtalk::clarify
