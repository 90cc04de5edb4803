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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gridtalk {

/// Dense row-major tensor of doubles.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);

  std::size_t size() const noexcept { return data.size(); }
  double& operator[](std::size_t i) noexcept { return data[i]; }
  double operator[](std::size_t i) const noexcept { return data[i]; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::size_t shape_size(const std::vector<std::size_t>& shape) noexcept;

struct NamedTensor {
  std::string name;
  Tensor tensor;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Versioned binary container of named tensors with a config header.
///
/// Layout (little-endian):
///   "GTCK" | u32 format version | str kind | str config | u32 count |
///   count x (str name | u32 rank | u64 dims[rank] | f64 data[...])
/// where str is a u32 byte length followed by the bytes.
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::string kind;
  /// Model configuration, serialized as JSON text by the owning model.
  std::string config;
  std::vector<NamedTensor> tensors;

  const Tensor& get(std::string_view name) const;

  std::string serialize() const;
  static Checkpoint deserialize(std::string_view bytes);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace gridtalk
