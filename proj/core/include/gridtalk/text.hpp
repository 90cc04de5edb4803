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
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace gridtalk {

/// Lowercases, splits on ASCII whitespace and strips punctuation from both
/// ends of every token. Empty tokens are dropped.
std::vector<std::string> tokenize_words(std::string_view text);

/// Plain whitespace split with no normalization.
std::vector<std::string> split_whitespace(std::string_view text);

std::string to_lower(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// English number word for 0..20; digits above that.
std::string count_word(std::size_t n);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Deterministic, platform-independent random source. The standard
/// distributions are implementation-defined, so sampling is done here.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  /// splitmix64 step.
  result_type operator()() noexcept;

  /// Uniform integer in [0, n). `n` must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Uniform double in [0, 1).
  double unit() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * unit(); }
  bool bernoulli(double p) noexcept { return unit() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

/// Mixes two values into a seed; used to derive independent streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

}  // namespace gridtalk
