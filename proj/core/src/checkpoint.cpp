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

#include "gridtalk/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gridtalk/error.hpp"

namespace gridtalk {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little-endian");

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)), data(shape_size(shape), 0.0) {}

std::size_t shape_size(const std::vector<std::size_t>& shape) noexcept {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

const Tensor& Checkpoint::get(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.tensor;
  }
  throw Error(Errc::BadCheckpoint, "checkpoint has no tensor '" + std::string(name) + "'");
}

namespace {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_str(std::string& out, std::string_view s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_str() {
    auto n = get<std::uint32_t>();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(Errc::BadCheckpoint, "truncated checkpoint");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string Checkpoint::serialize() const {
  std::string out = "GTCK";
  put<std::uint32_t>(out, kFormatVersion);
  put_str(out, kind);
  put_str(out, config);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_str(out, t.name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.tensor.shape.size()));
    for (auto d : t.tensor.shape) put<std::uint64_t>(out, d);
    for (double v : t.tensor.data) put<double>(out, v);
  }
  return out;
}

Checkpoint Checkpoint::deserialize(std::string_view bytes) {
  if (bytes.substr(0, 4) != "GTCK") throw Error(Errc::BadCheckpoint, "bad magic");
  Reader r(bytes.substr(4));
  auto version = r.get<std::uint32_t>();
  if (version != kFormatVersion) {
    throw Error(Errc::BadCheckpoint, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  c.kind = r.get_str();
  c.config = r.get_str();
  auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    nt.name = r.get_str();
    auto rank = r.get<std::uint32_t>();
    for (std::uint32_t k = 0; k < rank; ++k) {
      nt.tensor.shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));
    }
    nt.tensor.data.resize(shape_size(nt.tensor.shape));
    for (auto& v : nt.tensor.data) v = r.get<double>();
    c.tensors.push_back(std::move(nt));
  }
  if (!r.done()) throw Error(Errc::BadCheckpoint, "trailing bytes after checkpoint");
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

Checkpoint Checkpoint::load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "short write to " + path.string());
}

}  // namespace gridtalk
