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

#include "gridtalk/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gridtalk/error.hpp"
#include "gridtalk/text.hpp"
#include "json_codec.hpp"

namespace gridtalk::fusion {

using voxel::kCellCount;
using voxel::kChannelCount;

// ---------------------------------------------------------------------------
// World encoding and dialogue rendering
// ---------------------------------------------------------------------------

WorldTensor one_hot_encode(const voxel::VoxelWorld& world) {
  WorldTensor t{Tensor({kChannelCount, voxel::kSizeX, voxel::kSizeY, voxel::kSizeZ})};
  const auto& cells = world.cells();
  for (int i = 0; i < kCellCount; ++i) {
    t.values[static_cast<std::size_t>(cells[i]) * kCellCount + i] = 1.0;
  }
  return t;
}

voxel::VoxelWorld one_hot_decode(const WorldTensor& tensor) {
  const std::vector<std::size_t> expected{kChannelCount, voxel::kSizeX, voxel::kSizeY, voxel::kSizeZ};
  if (tensor.values.shape != expected) throw Error(Errc::ShapeMismatch, "world tensor must be 7x11x9x11");
  voxel::VoxelWorld w;
  for (int i = 0; i < kCellCount; ++i) {
    int hot = -1;
    for (int c = 0; c < kChannelCount; ++c) {
      double v = tensor.values[static_cast<std::size_t>(c) * kCellCount + i];
      if (v == 1.0) {
        if (hot >= 0) throw Error(Errc::ShapeMismatch, "cell has more than one hot channel");
        hot = c;
      } else if (v != 0.0) {
        throw Error(Errc::ShapeMismatch, "world tensor is not one-hot");
      }
    }
    if (hot < 0) throw Error(Errc::ShapeMismatch, "cell has no hot channel");
    if (hot > 0) w.set(voxel::cell_position(i), static_cast<voxel::BlockColor>(hot));
  }
  return w;
}

std::string DialogueString::render() const {
  std::string out;
  for (const auto& [role, text] : turns) {
    if (!out.empty()) out += ' ';
    out += role == Role::Architect ? "architect " : "builder ";
    out += text;
  }
  return out;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{"<unk>", "architect", "builder"}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<int>(i));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) { return Vocabulary(std::move(tokens)); }

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, std::size_t max_size) {
  std::map<std::string, std::size_t> freq;
  for (const auto& t : texts) {
    for (auto& tok : tokenize_words(t)) ++freq[tok];
  }
  freq.erase("architect");
  freq.erase("builder");
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens{"<unk>", "architect", "builder"};
  for (const auto& [tok, n] : ranked) {
    if (tokens.size() >= max_size) break;
    tokens.push_back(tok);
  }
  return from_tokens(std::move(tokens));
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& tok : tokenize_words(text)) {
    auto it = index_.find(tok);
    ids.push_back(it == index_.end() ? kUnknown : it->second);
  }
  return ids;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

int conv_out_dim(int in, int stride) { return (in - 1) / stride + 1; }

}  // namespace

void FusionConfig::validate() const {
  if (conv_channels.empty() || conv_channels.size() != conv_strides.size()) {
    throw Error(Errc::ShapeMismatch, "conv_channels and conv_strides must have k >= 1 entries each");
  }
  for (std::size_t i = 0; i < conv_channels.size(); ++i) {
    if (conv_channels[i] <= 0 || conv_strides[i] <= 0) {
      throw Error(Errc::InvalidArgument, "conv channels and strides must be positive");
    }
  }
  if (width <= 0 || heads <= 0 || block_pairs < 0 || vocab_size <= 0 || max_tokens <= 0) {
    throw Error(Errc::InvalidArgument, "fusion config sizes must be positive");
  }
  if (width % heads != 0) throw Error(Errc::ShapeMismatch, "width must be divisible by heads");
  if (conv_channels.back() != width) {
    throw Error(Errc::ShapeMismatch, "last conv layer must produce `width` channels");
  }
  if (!(learning_rate > 0.0)) throw Error(Errc::InvalidArgument, "learning rate must be positive");
}

std::size_t FusionConfig::grid_tokens() const {
  int x = voxel::kSizeX, y = voxel::kSizeY, z = voxel::kSizeZ;
  for (int s : conv_strides) {
    x = conv_out_dim(x, s);
    y = conv_out_dim(y, s);
    z = conv_out_dim(z, s);
  }
  return static_cast<std::size_t>(x) * y * z;
}

std::string config_to_json(const FusionConfig& c) {
  codec::Json j;
  j["conv_channels"] = c.conv_channels;
  j["conv_strides"] = c.conv_strides;
  j["vocab_size"] = c.vocab_size;
  j["width"] = c.width;
  j["heads"] = c.heads;
  j["block_pairs"] = c.block_pairs;
  j["max_tokens"] = c.max_tokens;
  j["learning_rate"] = c.learning_rate;
  j["seed"] = c.seed;
  return j.dump();
}

FusionConfig config_from_json(std::string_view text) {
  auto j = codec::parse(text);
  FusionConfig c;
  try {
    c.conv_channels = codec::require(j, "conv_channels").get<std::vector<int>>();
    c.conv_strides = codec::require(j, "conv_strides").get<std::vector<int>>();
    c.vocab_size = codec::require(j, "vocab_size").get<int>();
    c.width = codec::require(j, "width").get<int>();
    c.heads = codec::require(j, "heads").get<int>();
    c.block_pairs = codec::require(j, "block_pairs").get<int>();
    c.max_tokens = codec::require(j, "max_tokens").get<int>();
    c.learning_rate = codec::require(j, "learning_rate").get<double>();
    c.seed = codec::require(j, "seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SchemaError, std::string("bad fusion config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Dense helpers
// ---------------------------------------------------------------------------

namespace {

struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
};

// C = A * W where W is a d_in x d_out row-major parameter.
Mat mul(const Mat& a, const Tensor& w) {
  const std::size_t n = a.cols;
  const std::size_t m = w.shape[1];
  Mat c(a.rows, m);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* wr = &w.data[k * m];
      double* cr = &c.v[i * m];
      for (std::size_t j = 0; j < m; ++j) cr[j] += aik * wr[j];
    }
  }
  return c;
}

// G += A^T * B
void add_tn(const Mat& a, const Mat& b, Tensor& g) {
  const std::size_t m = b.cols;
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double ai = a(r, i);
      if (ai == 0.0) continue;
      double* gr = &g.data[i * m];
      const double* br = &b.v[r * m];
      for (std::size_t j = 0; j < m; ++j) gr[j] += ai * br[j];
    }
  }
}

// D += B * W^T
void add_nt(const Mat& b, const Tensor& w, Mat& d) {
  const std::size_t n = w.shape[0];
  const std::size_t m = w.shape[1];
  for (std::size_t r = 0; r < b.rows; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* wr = &w.data[i * m];
      const double* br = &b.v[r * m];
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += br[j] * wr[j];
      d(r, i) += s;
    }
  }
}

void add_into(Mat& dst, const Mat& src) {
  for (std::size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += src.v[i];
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// -log sigmoid(z) for label 1, -log(1 - sigmoid(z)) for label 0.
double bce_from_logit(double z, double label) {
  const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
  return softplus - label * z;
}

// ---------------------------------------------------------------------------
// Attention
// ---------------------------------------------------------------------------

struct AttnParams {
  const Tensor* wq;
  const Tensor* wk;
  const Tensor* wv;
  const Tensor* wo;
};

struct AttnCache {
  Mat x, y, q, k, v, o;
  std::vector<Mat> probs;  // one n_x x n_y matrix per head
};

// out = x + softmax(x Wq (y Wk)^T / sqrt(dh)) (y Wv) Wo, per head.
Mat attend(const Mat& x, const Mat& y, const AttnParams& p, int heads, AttnCache* cache) {
  const std::size_t d = x.cols;
  const std::size_t dh = d / static_cast<std::size_t>(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat q = mul(x, *p.wq);
  Mat k = mul(y, *p.wk);
  Mat v = mul(y, *p.wv);
  Mat o(x.rows, d);
  std::vector<Mat> probs;
  for (int h = 0; h < heads; ++h) {
    const std::size_t off = static_cast<std::size_t>(h) * dh;
    Mat pr(x.rows, y.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
      double mx = -INFINITY;
      for (std::size_t j = 0; j < y.rows; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < dh; ++c) s += q(i, off + c) * k(j, off + c);
        s *= scale;
        pr(i, j) = s;
        mx = std::max(mx, s);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < y.rows; ++j) {
        pr(i, j) = std::exp(pr(i, j) - mx);
        z += pr(i, j);
      }
      for (std::size_t j = 0; j < y.rows; ++j) pr(i, j) /= z;
      for (std::size_t j = 0; j < y.rows; ++j) {
        const double pij = pr(i, j);
        for (std::size_t c = 0; c < dh; ++c) o(i, off + c) += pij * v(j, off + c);
      }
    }
    probs.push_back(std::move(pr));
  }
  Mat out = mul(o, *p.wo);
  add_into(out, x);
  if (cache) {
    cache->x = x;
    cache->y = y;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->o = std::move(o);
    cache->probs = std::move(probs);
  }
  return out;
}

struct AttnGrads {
  Tensor* wq;
  Tensor* wk;
  Tensor* wv;
  Tensor* wo;
};

// Accumulates parameter gradients and adds input gradients into dx / dy.
// dx and dy may alias (self-attention).
void attend_backward(const AttnCache& c, const Mat& dout, const AttnParams& p, int heads,
                     const AttnGrads& g, Mat& dx, Mat& dy) {
  const std::size_t d = c.x.cols;
  const std::size_t dh = d / static_cast<std::size_t>(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const std::size_t nx = c.x.rows;
  const std::size_t ny = c.y.rows;

  add_tn(c.o, dout, *g.wo);
  Mat d_o(nx, d);
  add_nt(dout, *p.wo, d_o);

  Mat dq(nx, d), dk(ny, d), dv(ny, d);
  for (int h = 0; h < heads; ++h) {
    const std::size_t off = static_cast<std::size_t>(h) * dh;
    const Mat& pr = c.probs[static_cast<std::size_t>(h)];
    for (std::size_t i = 0; i < nx; ++i) {
      std::vector<double> dp(ny, 0.0);
      double dot = 0.0;
      for (std::size_t j = 0; j < ny; ++j) {
        double s = 0.0;
        for (std::size_t cc = 0; cc < dh; ++cc) {
          s += d_o(i, off + cc) * c.v(j, off + cc);
          dv(j, off + cc) += pr(i, j) * d_o(i, off + cc);
        }
        dp[j] = s;
        dot += s * pr(i, j);
      }
      for (std::size_t j = 0; j < ny; ++j) {
        const double ds = pr(i, j) * (dp[j] - dot) * scale;
        if (ds == 0.0) continue;
        for (std::size_t cc = 0; cc < dh; ++cc) {
          dq(i, off + cc) += ds * c.k(j, off + cc);
          dk(j, off + cc) += ds * c.q(i, off + cc);
        }
      }
    }
  }
  add_tn(c.x, dq, *g.wq);
  add_tn(c.y, dk, *g.wk);
  add_tn(c.y, dv, *g.wv);
  add_into(dx, dout);
  add_nt(dq, *p.wq, dx);
  add_nt(dk, *p.wk, dy);
  add_nt(dv, *p.wv, dy);
}

// ---------------------------------------------------------------------------
// 3D convolution, 3x3x3 kernel, padding 1
// ---------------------------------------------------------------------------

struct Dims {
  int x, y, z;
  std::size_t cells() const { return static_cast<std::size_t>(x) * y * z; }
};

std::vector<double> conv3d(const std::vector<double>& in, int cin, Dims din, const Tensor& w,
                           const Tensor& b, int cout, int stride, Dims dout) {
  std::vector<double> out(static_cast<std::size_t>(cout) * dout.cells(), 0.0);
  for (int co = 0; co < cout; ++co) {
    for (int ox = 0; ox < dout.x; ++ox) {
      for (int oy = 0; oy < dout.y; ++oy) {
        for (int oz = 0; oz < dout.z; ++oz) {
          double s = b.data[static_cast<std::size_t>(co)];
          for (int ci = 0; ci < cin; ++ci) {
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = ox * stride + kx - 1;
              if (ix < 0 || ix >= din.x) continue;
              for (int ky = 0; ky < 3; ++ky) {
                const int iy = oy * stride + ky - 1;
                if (iy < 0 || iy >= din.y) continue;
                for (int kz = 0; kz < 3; ++kz) {
                  const int iz = oz * stride + kz - 1;
                  if (iz < 0 || iz >= din.z) continue;
                  const double xin = in[((static_cast<std::size_t>(ci) * din.x + ix) * din.y + iy) * din.z + iz];
                  if (xin == 0.0) continue;
                  s += w.data[(((static_cast<std::size_t>(co) * cin + ci) * 3 + kx) * 3 + ky) * 3 + kz] * xin;
                }
              }
            }
          }
          out[((static_cast<std::size_t>(co) * dout.x + ox) * dout.y + oy) * dout.z + oz] = s;
        }
      }
    }
  }
  return out;
}

void conv3d_backward(const std::vector<double>& in, int cin, Dims din, const Tensor& w, int cout,
                     int stride, Dims dout, const std::vector<double>& dpre, Tensor& dw, Tensor& db,
                     std::vector<double>* din_grad) {
  for (int co = 0; co < cout; ++co) {
    for (int ox = 0; ox < dout.x; ++ox) {
      for (int oy = 0; oy < dout.y; ++oy) {
        for (int oz = 0; oz < dout.z; ++oz) {
          const double g = dpre[((static_cast<std::size_t>(co) * dout.x + ox) * dout.y + oy) * dout.z + oz];
          if (g == 0.0) continue;
          db.data[static_cast<std::size_t>(co)] += g;
          for (int ci = 0; ci < cin; ++ci) {
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = ox * stride + kx - 1;
              if (ix < 0 || ix >= din.x) continue;
              for (int ky = 0; ky < 3; ++ky) {
                const int iy = oy * stride + ky - 1;
                if (iy < 0 || iy >= din.y) continue;
                for (int kz = 0; kz < 3; ++kz) {
                  const int iz = oz * stride + kz - 1;
                  if (iz < 0 || iz >= din.z) continue;
                  const std::size_t ii = ((static_cast<std::size_t>(ci) * din.x + ix) * din.y + iy) * din.z + iz;
                  const std::size_t wi = (((static_cast<std::size_t>(co) * cin + ci) * 3 + kx) * 3 + ky) * 3 + kz;
                  dw.data[wi] += g * in[ii];
                  if (din_grad) (*din_grad)[ii] += g * w.data[wi];
                }
              }
            }
          }
        }
      }
    }
  }
}

// Parameter layout:
//   conv{l}.weight, conv{l}.bias           l < k
//   grid_pos, token_embedding, text_pos
//   block{i}.{grid_self,text_self,grid_cross,text_cross}.{wq,wk,wv,wo}
//   decoder.weight, decoder.bias
struct Layout {
  std::size_t k;
  std::size_t conv_weight(std::size_t l) const { return 2 * l; }
  std::size_t conv_bias(std::size_t l) const { return 2 * l + 1; }
  std::size_t grid_pos() const { return 2 * k; }
  std::size_t embedding() const { return 2 * k + 1; }
  std::size_t text_pos() const { return 2 * k + 2; }
  // unit: 0 grid_self, 1 text_self, 2 grid_cross, 3 text_cross; m: 0..3 = q,k,v,o
  std::size_t attn(std::size_t block, std::size_t unit, std::size_t m) const {
    return 2 * k + 3 + 16 * block + 4 * unit + m;
  }
  std::size_t decoder_weight(std::size_t pairs) const { return 2 * k + 3 + 16 * pairs; }
  std::size_t decoder_bias(std::size_t pairs) const { return decoder_weight(pairs) + 1; }
};

constexpr const char* kUnitNames[] = {"grid_self", "text_self", "grid_cross", "text_cross"};
constexpr const char* kProjNames[] = {"wq", "wk", "wv", "wo"};

}  // namespace

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

FusionModel::FusionModel(FusionConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::size_t d = static_cast<std::size_t>(config_.width);
  int cin = kChannelCount;
  for (std::size_t l = 0; l < config_.conv_channels.size(); ++l) {
    const auto cout = static_cast<std::size_t>(config_.conv_channels[l]);
    params_.push_back({"conv" + std::to_string(l) + ".weight",
                       Tensor({cout, static_cast<std::size_t>(cin), 3, 3, 3})});
    params_.push_back({"conv" + std::to_string(l) + ".bias", Tensor({cout})});
    cin = config_.conv_channels[l];
  }
  params_.push_back({"grid_pos", Tensor({config_.grid_tokens(), d})});
  params_.push_back({"token_embedding", Tensor({static_cast<std::size_t>(config_.vocab_size), d})});
  params_.push_back({"text_pos", Tensor({static_cast<std::size_t>(config_.max_tokens), d})});
  for (int b = 0; b < config_.block_pairs; ++b) {
    for (const char* unit : kUnitNames) {
      for (const char* proj : kProjNames) {
        params_.push_back({"block" + std::to_string(b) + "." + unit + "." + proj, Tensor({d, d})});
      }
    }
  }
  params_.push_back({"decoder.weight", Tensor({2 * d})});
  params_.push_back({"decoder.bias", Tensor({1})});

  Rng rng(config_.seed);
  for (auto& p : params_) {
    for (auto& v : p.tensor.data) v = rng.uniform(-0.05, 0.05);
  }
}

Tensor& FusionModel::parameter(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return p.tensor;
  }
  throw Error(Errc::InvalidArgument, "no parameter named '" + std::string(name) + "'");
}

struct FusionModel::Pass {
  std::vector<std::vector<double>> conv_in;   // input of each conv layer
  std::vector<std::vector<double>> conv_pre;  // pre-activation output
  std::vector<Dims> dims_in;
  std::vector<Dims> dims_out;
  std::vector<int> tokens;
  // Per block: grid_self, text_self, grid_cross, text_cross.
  std::vector<std::array<AttnCache, 4>> attn;
  std::vector<double> feature;
  std::size_t grid_rows = 0;
  std::size_t text_rows = 0;
};

double FusionModel::run(const WorldTensor& world, std::span<const int> tokens, Pass* pass) const {
  const std::vector<std::size_t> expected{kChannelCount, voxel::kSizeX, voxel::kSizeY, voxel::kSizeZ};
  if (world.values.shape != expected) throw Error(Errc::ShapeMismatch, "world tensor must be 7x11x9x11");
  if (tokens.empty()) throw Error(Errc::ShapeMismatch, "dialogue has no tokens");
  const Layout lay{config_.conv_channels.size()};
  const std::size_t d = static_cast<std::size_t>(config_.width);
  const std::size_t pairs = static_cast<std::size_t>(config_.block_pairs);

  // World encoder.
  std::vector<double> act = world.values.data;
  int cin = kChannelCount;
  Dims din{voxel::kSizeX, voxel::kSizeY, voxel::kSizeZ};
  for (std::size_t l = 0; l < lay.k; ++l) {
    const int stride = config_.conv_strides[l];
    const int cout = config_.conv_channels[l];
    Dims dout{conv_out_dim(din.x, stride), conv_out_dim(din.y, stride), conv_out_dim(din.z, stride)};
    auto pre = conv3d(act, cin, din, param(lay.conv_weight(l)), param(lay.conv_bias(l)), cout, stride, dout);
    std::vector<double> post(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) post[i] = pre[i] > 0.0 ? pre[i] : 0.0;
    if (pass) {
      pass->conv_in.push_back(std::move(act));
      pass->conv_pre.push_back(std::move(pre));
      pass->dims_in.push_back(din);
      pass->dims_out.push_back(dout);
    }
    act = std::move(post);
    din = dout;
    cin = cout;
  }

  // Grid tokens: one per spatial position of the last conv output.
  const std::size_t ng = din.cells();
  const Tensor& gpos = param(lay.grid_pos());
  Mat grid(ng, d);
  for (std::size_t n = 0; n < ng; ++n) {
    for (std::size_t c = 0; c < d; ++c) grid(n, c) = act[c * ng + n] + gpos.data[n * d + c];
  }

  // Text tokens: the most recent `max_tokens` ids.
  const std::size_t keep = std::min(tokens.size(), static_cast<std::size_t>(config_.max_tokens));
  auto used = tokens.subspan(tokens.size() - keep);
  const Tensor& emb = param(lay.embedding());
  const Tensor& tpos = param(lay.text_pos());
  Mat text(keep, d);
  for (std::size_t i = 0; i < keep; ++i) {
    const int id = used[i];
    if (id < 0 || id >= config_.vocab_size) throw Error(Errc::ShapeMismatch, "token id outside vocabulary");
    for (std::size_t c = 0; c < d; ++c) {
      text(i, c) = emb.data[static_cast<std::size_t>(id) * d + c] + tpos.data[i * d + c];
    }
  }
  if (pass) pass->tokens.assign(used.begin(), used.end());

  auto unit = [&](std::size_t b, std::size_t u) {
    return AttnParams{&param(lay.attn(b, u, 0)), &param(lay.attn(b, u, 1)), &param(lay.attn(b, u, 2)),
                      &param(lay.attn(b, u, 3))};
  };

  for (std::size_t b = 0; b < pairs; ++b) {
    std::array<AttnCache, 4>* caches = nullptr;
    if (pass) caches = &pass->attn.emplace_back();
    grid = attend(grid, grid, unit(b, 0), config_.heads, caches ? &(*caches)[0] : nullptr);
    text = attend(text, text, unit(b, 1), config_.heads, caches ? &(*caches)[1] : nullptr);
    Mat g2 = attend(grid, text, unit(b, 2), config_.heads, caches ? &(*caches)[2] : nullptr);
    Mat t2 = attend(text, grid, unit(b, 3), config_.heads, caches ? &(*caches)[3] : nullptr);
    grid = std::move(g2);
    text = std::move(t2);
  }

  // Mean-pool each stream and decode.
  std::vector<double> feature(2 * d, 0.0);
  for (std::size_t n = 0; n < grid.rows; ++n) {
    for (std::size_t c = 0; c < d; ++c) feature[c] += grid(n, c);
  }
  for (std::size_t n = 0; n < text.rows; ++n) {
    for (std::size_t c = 0; c < d; ++c) feature[d + c] += text(n, c);
  }
  for (std::size_t c = 0; c < d; ++c) {
    feature[c] /= static_cast<double>(grid.rows);
    feature[d + c] /= static_cast<double>(text.rows);
  }
  const Tensor& wdec = param(lay.decoder_weight(pairs));
  double logit = param(lay.decoder_bias(pairs)).data[0];
  for (std::size_t c = 0; c < 2 * d; ++c) logit += wdec.data[c] * feature[c];
  if (pass) {
    pass->feature = std::move(feature);
    pass->grid_rows = grid.rows;
    pass->text_rows = text.rows;
  }
  return logit;
}

void FusionModel::backprop(const Pass& pass, double dlogit, std::vector<Tensor>& grads) const {
  const Layout lay{config_.conv_channels.size()};
  const std::size_t d = static_cast<std::size_t>(config_.width);
  const std::size_t pairs = static_cast<std::size_t>(config_.block_pairs);

  // Decoder.
  const Tensor& wdec = param(lay.decoder_weight(pairs));
  Tensor& gw = grads[lay.decoder_weight(pairs)];
  for (std::size_t c = 0; c < 2 * d; ++c) gw.data[c] += dlogit * pass.feature[c];
  grads[lay.decoder_bias(pairs)].data[0] += dlogit;

  Mat dgrid(pass.grid_rows, d);
  Mat dtext(pass.text_rows, d);
  for (std::size_t c = 0; c < d; ++c) {
    const double gg = dlogit * wdec.data[c] / static_cast<double>(pass.grid_rows);
    const double gt = dlogit * wdec.data[d + c] / static_cast<double>(pass.text_rows);
    for (std::size_t n = 0; n < pass.grid_rows; ++n) dgrid(n, c) = gg;
    for (std::size_t n = 0; n < pass.text_rows; ++n) dtext(n, c) = gt;
  }

  auto unit_params = [&](std::size_t b, std::size_t u) {
    return AttnParams{&param(lay.attn(b, u, 0)), &param(lay.attn(b, u, 1)), &param(lay.attn(b, u, 2)),
                      &param(lay.attn(b, u, 3))};
  };
  auto unit_grads = [&](std::size_t b, std::size_t u) {
    return AttnGrads{&grads[lay.attn(b, u, 0)], &grads[lay.attn(b, u, 1)], &grads[lay.attn(b, u, 2)],
                     &grads[lay.attn(b, u, 3)]};
  };

  for (std::size_t bi = pairs; bi-- > 0;) {
    const auto& caches = pass.attn[bi];
    // Cross step: both outputs depend on both inputs.
    Mat dg(pass.grid_rows, d), dt(pass.text_rows, d);
    attend_backward(caches[2], dgrid, unit_params(bi, 2), config_.heads, unit_grads(bi, 2), dg, dt);
    attend_backward(caches[3], dtext, unit_params(bi, 3), config_.heads, unit_grads(bi, 3), dt, dg);
    // Self step.
    Mat dg0(pass.grid_rows, d), dt0(pass.text_rows, d);
    attend_backward(caches[0], dg, unit_params(bi, 0), config_.heads, unit_grads(bi, 0), dg0, dg0);
    attend_backward(caches[1], dt, unit_params(bi, 1), config_.heads, unit_grads(bi, 1), dt0, dt0);
    dgrid = std::move(dg0);
    dtext = std::move(dt0);
  }

  // Text embeddings.
  Tensor& gemb = grads[lay.embedding()];
  Tensor& gtpos = grads[lay.text_pos()];
  for (std::size_t i = 0; i < pass.tokens.size(); ++i) {
    const auto id = static_cast<std::size_t>(pass.tokens[i]);
    for (std::size_t c = 0; c < d; ++c) {
      gemb.data[id * d + c] += dtext(i, c);
      gtpos.data[i * d + c] += dtext(i, c);
    }
  }

  // Grid tokens back to the conv output layout.
  const std::size_t ng = pass.grid_rows;
  Tensor& ggpos = grads[lay.grid_pos()];
  std::vector<double> dact(d * ng);
  for (std::size_t n = 0; n < ng; ++n) {
    for (std::size_t c = 0; c < d; ++c) {
      ggpos.data[n * d + c] += dgrid(n, c);
      dact[c * ng + n] = dgrid(n, c);
    }
  }

  for (std::size_t l = lay.k; l-- > 0;) {
    const auto& pre = pass.conv_pre[l];
    std::vector<double> dpre(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) dpre[i] = pre[i] > 0.0 ? dact[i] : 0.0;
    const int cin = l == 0 ? kChannelCount : config_.conv_channels[l - 1];
    std::vector<double> din;
    if (l > 0) din.assign(pass.conv_in[l].size(), 0.0);
    conv3d_backward(pass.conv_in[l], cin, pass.dims_in[l], param(lay.conv_weight(l)), config_.conv_channels[l],
                    config_.conv_strides[l], pass.dims_out[l], dpre, grads[lay.conv_weight(l)],
                    grads[lay.conv_bias(l)], l > 0 ? &din : nullptr);
    dact = std::move(din);
  }
}

double FusionModel::forward(const WorldTensor& world, std::span<const int> tokens) const {
  return sigmoid(run(world, tokens, nullptr));
}

double FusionModel::loss(std::span<const Example> batch) const {
  if (batch.empty()) throw Error(Errc::EmptyInput, "empty batch");
  double total = 0.0;
  for (const auto& ex : batch) total += bce_from_logit(run(ex.world, ex.tokens, nullptr), ex.label);
  return total / static_cast<double>(batch.size());
}

double FusionModel::loss_and_gradient(std::span<const Example> batch, std::vector<Tensor>& grads) const {
  if (batch.empty()) throw Error(Errc::EmptyInput, "empty batch");
  grads.clear();
  for (const auto& p : params_) grads.emplace_back(p.tensor.shape);
  const double inv = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& ex : batch) {
    Pass pass;
    const double logit = run(ex.world, ex.tokens, &pass);
    total += bce_from_logit(logit, ex.label);
    backprop(pass, (sigmoid(logit) - ex.label) * inv, grads);
  }
  return total * inv;
}

double FusionModel::backward_and_step(std::span<const Example> batch) {
  std::vector<Tensor> grads;
  const double l = loss_and_gradient(batch, grads);
  if (!std::isfinite(l)) throw Error(Errc::NonFiniteLoss, "training diverged");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i].tensor.data;
    const auto& g = grads[i].data;
    for (std::size_t j = 0; j < p.size(); ++j) p[j] -= config_.learning_rate * g[j];
  }
  return l;
}

Checkpoint FusionModel::to_checkpoint(const Vocabulary& vocab) const {
  auto cfg = codec::parse(config_to_json(config_));
  cfg["vocabulary"] = vocab.tokens();
  return Checkpoint{"fusion", cfg.dump(), params_};
}

std::pair<FusionModel, Vocabulary> FusionModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "fusion") throw Error(Errc::BadCheckpoint, "not a fusion checkpoint: " + ckpt.kind);
  FusionModel model(config_from_json(ckpt.config));
  if (model.params_.size() != ckpt.tensors.size()) throw Error(Errc::BadCheckpoint, "parameter count mismatch");
  for (std::size_t i = 0; i < ckpt.tensors.size(); ++i) {
    if (ckpt.tensors[i].name != model.params_[i].name ||
        ckpt.tensors[i].tensor.shape != model.params_[i].tensor.shape) {
      throw Error(Errc::ShapeMismatch, "checkpoint tensor '" + ckpt.tensors[i].name + "' does not fit config");
    }
    model.params_[i].tensor = ckpt.tensors[i].tensor;
  }
  auto j = codec::parse(ckpt.config);
  auto vocab = Vocabulary::from_tokens(codec::require(j, "vocabulary").get<std::vector<std::string>>());
  return {std::move(model), std::move(vocab)};
}

}  // namespace gridtalk::fusion
