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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gridtalk/checkpoint.hpp"
#include "gridtalk/voxel.hpp"

namespace gridtalk::fusion {

/// 7x11x9x11 one-hot world encoding; channel 0 is empty, 1..6 the colors.
/// Spatial order matches voxel::cell_index.
struct WorldTensor {
  Tensor values;
};

WorldTensor one_hot_encode(const voxel::VoxelWorld& world);
/// Inverse of one_hot_encode. Throws ShapeMismatch unless every cell is one-hot.
voxel::VoxelWorld one_hot_decode(const WorldTensor& tensor);

enum class Role { Architect, Builder };

/// Role-tagged dialogue, rendered as "architect <A1> builder <B1> ...".
struct DialogueString {
  std::vector<std::pair<Role, std::string>> turns;

  std::string render() const;
};

/// Lowercase whitespace vocabulary with id 0 reserved for unknown tokens.
class Vocabulary {
 public:
  static constexpr int kUnknown = 0;

  Vocabulary();
  /// Keeps the `max_size - 1` most frequent tokens (ties alphabetical); the
  /// role tags are always included.
  static Vocabulary build(const std::vector<std::string>& texts, std::size_t max_size);
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::vector<int> encode(std::string_view text) const;
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  explicit Vocabulary(std::vector<std::string> tokens);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct FusionConfig {
  /// One entry per 3D conv layer (k = size); the last must equal `width`.
  std::vector<int> conv_channels{8, 16};
  /// Stride of each conv layer (3x3x3 kernels, padding 1).
  std::vector<int> conv_strides{2, 2};
  int vocab_size = 256;
  /// Token width shared by the grid and text streams.
  int width = 16;
  int heads = 1;
  /// Each pair is one self-attention step per modality followed by one
  /// cross-attention step in each direction.
  int block_pairs = 2;
  int max_tokens = 64;
  double learning_rate = 0.05;
  std::uint64_t seed = 7;

  /// Throws ShapeMismatch / InvalidArgument.
  void validate() const;
  /// Number of grid tokens produced by the conv stack.
  std::size_t grid_tokens() const;
};

struct Example {
  WorldTensor world;
  std::vector<int> tokens;
  /// 1 = clarification needed.
  double label = 0.0;
};

/// Clarification-need classifier: conv world encoder, token embeddings,
/// interleaved self/cross attention, mean pooling and a sigmoid slot decoder.
class FusionModel {
 public:
  explicit FusionModel(FusionConfig config);

  const FusionConfig& config() const noexcept { return config_; }
  std::vector<NamedTensor>& parameters() noexcept { return params_; }
  const std::vector<NamedTensor>& parameters() const noexcept { return params_; }
  Tensor& parameter(std::string_view name);

  /// Probability in (0, 1) that the dialogue needs clarification.
  double forward(const WorldTensor& world, std::span<const int> tokens) const;

  /// Mean binary cross-entropy over `batch`.
  double loss(std::span<const Example> batch) const;
  /// Mean loss plus its gradient w.r.t. every parameter, in `parameters()` order.
  double loss_and_gradient(std::span<const Example> batch, std::vector<Tensor>& grads) const;
  /// One gradient-descent step; returns the pre-step loss. Throws NonFiniteLoss.
  double backward_and_step(std::span<const Example> batch);

  Checkpoint to_checkpoint(const Vocabulary& vocab) const;
  static std::pair<FusionModel, Vocabulary> from_checkpoint(const Checkpoint& ckpt);

 private:
  struct Pass;
  double run(const WorldTensor& world, std::span<const int> tokens, Pass* pass) const;
  void backprop(const Pass& pass, double dlogit, std::vector<Tensor>& grads) const;
  const Tensor& param(std::size_t index) const { return params_[index].tensor; }

  FusionConfig config_;
  std::vector<NamedTensor> params_;
};

std::string config_to_json(const FusionConfig& config);
FusionConfig config_from_json(std::string_view text);

}  // namespace gridtalk::fusion
