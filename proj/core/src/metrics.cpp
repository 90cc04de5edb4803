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

#include "gridtalk/metrics.hpp"

#include "gridtalk/error.hpp"

namespace gridtalk::clarify {

double f1_score(std::span<const bool> predictions, std::span<const bool> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(Errc::LengthMismatch, "predictions and labels differ in length");
  }
  if (labels.empty()) throw Error(Errc::EmptyInput, "no predictions");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] && labels[i]) ++tp;
    else if (predictions[i]) ++fp;
    else if (labels[i]) ++fn;
  }
  const double precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double mrr_at_k(std::span<const RankedQuery> queries, std::size_t k) {
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be at least 1");
  if (queries.empty()) throw Error(Errc::EmptyInput, "no queries");
  double total = 0.0;
  for (const auto& q : queries) {
    const std::size_t limit = std::min(k, q.ranking.size());
    for (std::size_t r = 0; r < limit; ++r) {
      if (q.ranking[r] == q.gold) {
        total += 1.0 / static_cast<double>(r + 1);
        break;
      }
    }
  }
  return total / static_cast<double>(queries.size());
}

}  // namespace gridtalk::clarify
