// Copyright 2026 The SSDA Desk Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ssda/detector.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <tuple>

#include "ssda/config.h"
#include "ssda/errors.h"

namespace ssda {
namespace {

constexpr double kInitialObjectness = 0.01;

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

int log2_exact(int v) {
  int k = 0;
  while ((1 << k) < v) ++k;
  return (1 << k) == v ? k : -1;
}

enum class OpKind { kInput, kConv, kUpsample2, kConcat };

struct Node {
  OpKind kind = OpKind::kInput;
  std::vector<int> inputs;
  int channels = 0;
  int size = 0;  // square spatial extent
  // Convolution only.
  int weight = -1;
  int bias = -1;
  int in_channels = 0;
  int kernel = 1;
  int stride = 1;
  bool silu = false;
  bool is_head = false;
};

struct Plan {
  std::vector<Node> nodes;
  std::vector<int> heads;  // node index per head level
  ParamSchema schema;
};

Plan build_plan(const DetectorConfig& cfg) {
  Plan plan;
  plan.nodes.push_back({OpKind::kInput, {}, 3, cfg.image_size});

  auto add_conv = [&](const std::string& name, int input, int cout, int k,
                      int stride, bool silu) {
    const Node& in = plan.nodes[input];
    Node n;
    n.kind = OpKind::kConv;
    n.inputs = {input};
    n.in_channels = in.channels;
    n.channels = cout;
    n.kernel = k;
    n.stride = stride;
    n.size = in.size / stride;
    n.silu = silu;
    n.weight = static_cast<int>(plan.schema.size());
    plan.schema.push_back({name + ".weight", {cout, in.channels, k, k}});
    n.bias = static_cast<int>(plan.schema.size());
    plan.schema.push_back({name + ".bias", {cout}});
    plan.nodes.push_back(n);
    return static_cast<int>(plan.nodes.size()) - 1;
  };

  const int stages = static_cast<int>(cfg.channel_widths.size());
  std::vector<int> stage_out(stages);
  int current = 0;
  for (int s = 0; s < stages; ++s) {
    const std::string prefix = "backbone." + std::to_string(s);
    current = add_conv(prefix + ".down", current, cfg.channel_widths[s], 3, 2, true);
    for (int r = 0; r < cfg.stage_repeats[s]; ++r) {
      current = add_conv(prefix + ".conv" + std::to_string(r), current,
                         cfg.channel_widths[s], 3, 1, true);
    }
    stage_out[s] = current;
  }

  const int levels = cfg.num_scales();
  auto stage_of = [&](int level) { return log2_exact(cfg.strides[level]) - 1; };
  std::vector<int> features(levels);
  features[levels - 1] = stage_out[stage_of(levels - 1)];
  for (int l = levels - 2; l >= 0; --l) {
    const Node& top = plan.nodes[features[l + 1]];
    Node up;
    up.kind = OpKind::kUpsample2;
    up.inputs = {features[l + 1]};
    up.channels = top.channels;
    up.size = top.size * 2;
    plan.nodes.push_back(up);
    const int up_idx = static_cast<int>(plan.nodes.size()) - 1;

    const int lateral = stage_out[stage_of(l)];
    Node cat;
    cat.kind = OpKind::kConcat;
    cat.inputs = {up_idx, lateral};
    cat.channels = up.channels + plan.nodes[lateral].channels;
    cat.size = up.size;
    plan.nodes.push_back(cat);
    const int cat_idx = static_cast<int>(plan.nodes.size()) - 1;

    features[l] = add_conv("neck." + std::to_string(l) + ".fuse", cat_idx,
                           cfg.channel_widths[stage_of(l)], cfg.fuse_kernel, 1,
                           true);
  }

  const int head_channels = cfg.anchors_per_scale * cfg.outputs_per_anchor();
  for (int l = 0; l < levels; ++l) {
    const int h = add_conv("head." + std::to_string(l), features[l],
                           head_channels, 1, 1, false);
    plan.nodes[h].is_head = true;
    plan.heads.push_back(h);
  }
  return plan;
}

template <typename T>
void im2col(const T* in, int channels, int size, int k, int stride, int out_size,
            T* col) {
  const int pad = k / 2;
  const int out_area = out_size * out_size;
  for (int c = 0; c < channels; ++c) {
    const T* plane = in + static_cast<size_t>(c) * size * size;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = col + (static_cast<size_t>(c) * k * k + ky * k + kx) * out_area;
        for (int oy = 0; oy < out_size; ++oy) {
          const int iy = oy * stride - pad + ky;
          T* dst = row + static_cast<size_t>(oy) * out_size;
          if (iy < 0 || iy >= size) {
            std::fill(dst, dst + out_size, T(0));
            continue;
          }
          const T* src = plane + static_cast<size_t>(iy) * size;
          for (int ox = 0; ox < out_size; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst[ox] = (ix < 0 || ix >= size) ? T(0) : src[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, int channels, int size, int k, int stride,
                int out_size, T* in_grad) {
  const int pad = k / 2;
  const int out_area = out_size * out_size;
  for (int c = 0; c < channels; ++c) {
    T* plane = in_grad + static_cast<size_t>(c) * size * size;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row =
            col + (static_cast<size_t>(c) * k * k + ky * k + kx) * out_area;
        for (int oy = 0; oy < out_size; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= size) continue;
          const T* src = row + static_cast<size_t>(oy) * out_size;
          T* dst = plane + static_cast<size_t>(iy) * size;
          for (int ox = 0; ox < out_size; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < size) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename T>
T silu(T x) {
  return x / (T(1) + std::exp(-x));
}

template <typename T>
T silu_grad(T x) {
  const T s = T(1) / (T(1) + std::exp(-x));
  return s * (T(1) + x * (T(1) - s));
}

}  // namespace

void DetectorConfig::validate() const {
  if (image_size <= 0) throw ConfigError("image_size must be positive");
  if (num_classes < 1) throw ConfigError("num_classes must be at least 1");
  if (anchors_per_scale < 1) throw ConfigError("anchors_per_scale must be >= 1");
  if (strides.empty()) throw ConfigError("strides must not be empty");
  for (size_t i = 0; i < strides.size(); ++i) {
    if (log2_exact(strides[i]) < 1) {
      throw ConfigError("stride " + std::to_string(strides[i]) +
                        " is not a power of two >= 2");
    }
    if (i > 0 && strides[i] != 2 * strides[i - 1]) {
      throw ConfigError("strides must double from one scale to the next");
    }
    if (image_size % strides[i] != 0) {
      throw ConfigError("image_size " + std::to_string(image_size) +
                        " is not divisible by stride " + std::to_string(strides[i]));
    }
  }
  const int stages = log2_exact(strides.back());
  if (static_cast<int>(channel_widths.size()) != stages) {
    throw ConfigError("channel_widths needs " + std::to_string(stages) +
                      " entries for largest stride " + std::to_string(strides.back()));
  }
  if (static_cast<int>(stage_repeats.size()) != stages) {
    throw ConfigError("stage_repeats needs " + std::to_string(stages) + " entries");
  }
  for (int w : channel_widths) {
    if (w < 1) throw ConfigError("channel widths must be positive");
  }
  for (int r : stage_repeats) {
    if (r < 0) throw ConfigError("stage_repeats must be non-negative");
  }
  if (fuse_kernel != 1 && fuse_kernel != 3) {
    throw ConfigError("fuse_kernel must be 1 or 3");
  }
  if (anchor_sizes.size() != strides.size()) {
    throw ConfigError("anchor_sizes needs one list per stride");
  }
  for (const auto& scale : anchor_sizes) {
    if (static_cast<int>(scale.size()) != anchors_per_scale) {
      throw ConfigError("anchor_sizes needs exactly anchors_per_scale entries per scale");
    }
    for (const AnchorSize& a : scale) {
      if (!(a.w > 0.0) || !(a.h > 0.0)) {
        throw ConfigError("anchor sizes must be positive");
      }
    }
  }
}

int DetectorConfig::total_slots() const {
  int n = 0;
  for (int s = 0; s < num_scales(); ++s) n += grid(s) * grid(s) * anchors_per_scale;
  return n;
}

DetectorConfig DetectorConfig::tiny(int num_classes) {
  DetectorConfig cfg;
  cfg.image_size = 32;
  cfg.num_classes = num_classes;
  cfg.channel_widths = {4, 6, 8, 8, 8};
  cfg.stage_repeats = {0, 0, 0, 0, 0};
  cfg.fuse_kernel = 1;
  cfg.anchor_sizes = {{{4, 4}, {6, 6}, {8, 8}},
                      {{10, 10}, {12, 12}, {14, 14}},
                      {{16, 16}, {20, 20}, {24, 24}}};
  return cfg;
}

std::string serialize_detector_config(const DetectorConfig& cfg) {
  KeyValues kv;
  kv.set("image_size", std::to_string(cfg.image_size));
  kv.set("strides", join_ints(cfg.strides));
  kv.set("anchors_per_scale", std::to_string(cfg.anchors_per_scale));
  std::string anchors;
  for (size_t s = 0; s < cfg.anchor_sizes.size(); ++s) {
    if (s) anchors += ';';
    for (size_t a = 0; a < cfg.anchor_sizes[s].size(); ++a) {
      if (a) anchors += ',';
      anchors += format_double(cfg.anchor_sizes[s][a].w) + "x" +
                 format_double(cfg.anchor_sizes[s][a].h);
    }
  }
  kv.set("anchor_sizes", anchors);
  kv.set("num_classes", std::to_string(cfg.num_classes));
  kv.set("channel_widths", join_ints(cfg.channel_widths));
  kv.set("stage_repeats", join_ints(cfg.stage_repeats));
  kv.set("fuse_kernel", std::to_string(cfg.fuse_kernel));
  return kv.to_text();
}

DetectorConfig parse_detector_config(const std::string& text) {
  const KeyValues kv = KeyValues::parse(text, "detector config");
  DetectorConfig cfg;
  auto need = [&](const std::string& key) {
    auto v = kv.get(key);
    if (!v) throw ConfigError("detector config is missing key '" + key + "'");
    return *v;
  };
  cfg.image_size = parse_int("image_size", need("image_size"));
  cfg.strides = parse_int_list("strides", need("strides"));
  cfg.anchors_per_scale = parse_int("anchors_per_scale", need("anchors_per_scale"));
  cfg.anchor_sizes.clear();
  for (const std::string& scale : split(need("anchor_sizes"), ';')) {
    std::vector<AnchorSize> anchors;
    for (const std::string& item : split(scale, ',')) {
      const auto wh = split(item, 'x');
      if (wh.size() != 2) throw ConfigError("bad anchor '" + item + "'");
      anchors.push_back({parse_double("anchor_sizes", wh[0]),
                         parse_double("anchor_sizes", wh[1])});
    }
    cfg.anchor_sizes.push_back(anchors);
  }
  cfg.num_classes = parse_int("num_classes", need("num_classes"));
  cfg.channel_widths = parse_int_list("channel_widths", need("channel_widths"));
  cfg.stage_repeats = parse_int_list("stage_repeats", need("stage_repeats"));
  cfg.fuse_kernel = parse_int("fuse_kernel", need("fuse_kernel"));
  cfg.validate();
  return cfg;
}

template <typename T>
PredictionMap<T> PredictionMap<T>::zeros(const DetectorConfig& cfg) {
  PredictionMap<T> map;
  for (int s = 0; s < cfg.num_scales(); ++s) {
    ScalePrediction<T> sp;
    sp.grid = cfg.grid(s);
    sp.anchors = cfg.anchors_per_scale;
    sp.channels = cfg.outputs_per_anchor();
    sp.values.assign(static_cast<size_t>(sp.grid) * sp.grid * sp.anchors * sp.channels,
                     T(0));
    map.scales.push_back(std::move(sp));
  }
  return map;
}

template <typename T>
size_t PredictionMap<T>::total_values() const {
  size_t n = 0;
  for (const auto& s : scales) n += s.values.size();
  return n;
}

ParamSchema detector_schema(const DetectorConfig& cfg) {
  cfg.validate();
  return build_plan(cfg).schema;
}

size_t parameter_count(const DetectorConfig& cfg) {
  size_t n = 0;
  for (const ParamSpec& s : detector_schema(cfg)) n += s.count();
  return n;
}

template <typename T>
ParamSet<T> init_params(const DetectorConfig& cfg, uint64_t seed) {
  cfg.validate();
  const Plan plan = build_plan(cfg);
  ParamSet<T> params(plan.schema);
  std::mt19937_64 rng(seed);
  for (const Node& n : plan.nodes) {
    if (n.kind != OpKind::kConv) continue;
    const double fan_in = static_cast<double>(n.in_channels) * n.kernel * n.kernel;
    // Uniform with variance 3/fan_in on SiLU layers, which keeps the
    // activation scale roughly constant with depth in a network without
    // normalization layers; small heads keep initial logits near their bias.
    const double bound = n.is_head ? 0.2 / std::sqrt(fan_in) : std::sqrt(9.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (T& w : params[n.weight].values) w = static_cast<T>(dist(rng));
    auto& bias = params[n.bias].values;
    std::fill(bias.begin(), bias.end(), T(0));
    if (n.is_head) {
      for (int a = 0; a < cfg.anchors_per_scale; ++a) {
        bias[a * cfg.outputs_per_anchor() + 4] = static_cast<T>(logit(kInitialObjectness));
      }
    }
  }
  return params;
}

template <typename T>
PredictionMap<T> forward(const DetectorConfig& cfg, const ParamSet<T>& params,
                         const Image& image, ForwardCache<T>* cache) {
  if (image.width != cfg.image_size || image.height != cfg.image_size ||
      image.pixels.size() != static_cast<size_t>(cfg.image_size) * cfg.image_size * 3) {
    throw ConfigError("forward expects a " + std::to_string(cfg.image_size) + "x" +
                      std::to_string(cfg.image_size) + "x3 image, got " +
                      std::to_string(image.width) + "x" + std::to_string(image.height));
  }
  const Plan plan = build_plan(cfg);
  if (params.size() != plan.schema.size()) {
    throw SchemaError("parameter set does not match detector config: " +
                      describe_schema_mismatch(params.schema(), plan.schema));
  }

  ForwardCache<T> local;
  ForwardCache<T>& c = cache ? *cache : local;
  const size_t n_nodes = plan.nodes.size();
  c.outputs.resize(n_nodes);
  c.preacts.resize(n_nodes);
  c.cols.resize(n_nodes);

  {
    // Pixels enter centered on mid-gray; there is no normalization layer.
    const int size = cfg.image_size;
    const size_t area = static_cast<size_t>(size) * size;
    auto& out = c.outputs[0];
    out.resize(3 * area);
    for (size_t p = 0; p < area; ++p) {
      for (int ch = 0; ch < 3; ++ch) {
        out[ch * area + p] = static_cast<T>(image.pixels[p * 3 + ch]) - T(0.5);
      }
    }
  }

  for (size_t i = 1; i < n_nodes; ++i) {
    const Node& n = plan.nodes[i];
    auto& out = c.outputs[i];
    const size_t area = static_cast<size_t>(n.size) * n.size;
    out.resize(static_cast<size_t>(n.channels) * area);
    switch (n.kind) {
      case OpKind::kConv: {
        const Node& in_node = plan.nodes[n.inputs[0]];
        const auto& in = c.outputs[n.inputs[0]];
        const int rows = n.in_channels * n.kernel * n.kernel;
        const T* col = in.data();
        if (n.kernel != 1 || n.stride != 1) {
          c.cols[i].resize(static_cast<size_t>(rows) * area);
          im2col(in.data(), n.in_channels, in_node.size, n.kernel, n.stride, n.size,
                 c.cols[i].data());
          col = c.cols[i].data();
        }
        ConstMatMap<T> w(params[n.weight].values.data(), n.channels, rows);
        ConstMatMap<T> x(col, rows, static_cast<Eigen::Index>(area));
        MatMap<T> y(out.data(), n.channels, static_cast<Eigen::Index>(area));
        y.noalias() = w * x;
        const auto& b = params[n.bias].values;
        for (int ch = 0; ch < n.channels; ++ch) y.row(ch).array() += b[ch];
        if (n.silu) {
          c.preacts[i] = out;
          for (T& v : out) v = silu(v);
        }
        break;
      }
      case OpKind::kUpsample2: {
        const auto& in = c.outputs[n.inputs[0]];
        const int half = n.size / 2;
        for (int ch = 0; ch < n.channels; ++ch) {
          for (int y = 0; y < n.size; ++y) {
            for (int x = 0; x < n.size; ++x) {
              out[(static_cast<size_t>(ch) * n.size + y) * n.size + x] =
                  in[(static_cast<size_t>(ch) * half + y / 2) * half + x / 2];
            }
          }
        }
        break;
      }
      case OpKind::kConcat: {
        const auto& a = c.outputs[n.inputs[0]];
        const auto& b = c.outputs[n.inputs[1]];
        std::copy(a.begin(), a.end(), out.begin());
        std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(a.size()));
        break;
      }
      case OpKind::kInput:
        break;
    }
  }

  PredictionMap<T> pred = PredictionMap<T>::zeros(cfg);
  for (int s = 0; s < cfg.num_scales(); ++s) {
    const auto& head = c.outputs[plan.heads[s]];
    auto& sp = pred.scales[s];
    const size_t area = static_cast<size_t>(sp.grid) * sp.grid;
    for (int a = 0; a < sp.anchors; ++a) {
      for (int k = 0; k < sp.channels; ++k) {
        const T* src = head.data() + (static_cast<size_t>(a) * sp.channels + k) * area;
        for (size_t p = 0; p < area; ++p) {
          sp.values[(p * sp.anchors + a) * sp.channels + k] = src[p];
        }
      }
    }
  }
  return pred;
}

template <typename T>
void backward(const DetectorConfig& cfg, const ParamSet<T>& params,
              const ForwardCache<T>& cache, const PredictionMap<T>& grad_pred,
              ParamSet<T>& grads) {
  const Plan plan = build_plan(cfg);
  if (!grads.same_schema(params)) {
    throw SchemaError("gradient buffer schema differs from parameters");
  }
  const size_t n_nodes = plan.nodes.size();
  if (cache.outputs.size() != n_nodes) {
    throw ConfigError("backward called with a cache from a different network");
  }
  std::vector<std::vector<T>> g(n_nodes);
  auto grad_of = [&](int idx) -> std::vector<T>& {
    auto& v = g[idx];
    if (v.empty()) v.assign(cache.outputs[idx].size(), T(0));
    return v;
  };

  for (int s = 0; s < cfg.num_scales(); ++s) {
    const auto& sp = grad_pred.scales[s];
    auto& dst = grad_of(plan.heads[s]);
    const size_t area = static_cast<size_t>(sp.grid) * sp.grid;
    for (int a = 0; a < sp.anchors; ++a) {
      for (int k = 0; k < sp.channels; ++k) {
        T* out = dst.data() + (static_cast<size_t>(a) * sp.channels + k) * area;
        for (size_t p = 0; p < area; ++p) {
          out[p] += sp.values[(p * sp.anchors + a) * sp.channels + k];
        }
      }
    }
  }

  for (size_t i = n_nodes - 1; i >= 1; --i) {
    if (g[i].empty()) continue;
    const Node& n = plan.nodes[i];
    const size_t area = static_cast<size_t>(n.size) * n.size;
    switch (n.kind) {
      case OpKind::kConv: {
        std::vector<T>& gy = g[i];
        if (n.silu) {
          const auto& pre = cache.preacts[i];
          for (size_t j = 0; j < gy.size(); ++j) gy[j] *= silu_grad(pre[j]);
        }
        const Node& in_node = plan.nodes[n.inputs[0]];
        const int rows = n.in_channels * n.kernel * n.kernel;
        const bool direct = n.kernel == 1 && n.stride == 1;
        const T* col = direct ? cache.outputs[n.inputs[0]].data() : cache.cols[i].data();
        ConstMatMap<T> x(col, rows, static_cast<Eigen::Index>(area));
        ConstMatMap<T> dy(gy.data(), n.channels, static_cast<Eigen::Index>(area));
        MatMap<T> dw(grads[n.weight].values.data(), n.channels, rows);
        dw.noalias() += dy * x.transpose();
        auto& db = grads[n.bias].values;
        // Plain loop: Eigen's vectorized reduction order depends on the
        // buffer alignment, which would make runs non-reproducible.
        for (int ch = 0; ch < n.channels; ++ch) {
          const T* row = gy.data() + static_cast<size_t>(ch) * area;
          T sum = T(0);
          for (size_t j = 0; j < area; ++j) sum += row[j];
          db[ch] += sum;
        }
        if (n.inputs[0] != 0) {
          ConstMatMap<T> w(params[n.weight].values.data(), n.channels, rows);
          auto& gin = grad_of(n.inputs[0]);
          if (direct) {
            MatMap<T> dx(gin.data(), rows, static_cast<Eigen::Index>(area));
            dx.noalias() += w.transpose() * dy;
          } else {
            RowMat<T> dcol = w.transpose() * dy;
            col2im_add(dcol.data(), n.in_channels, in_node.size, n.kernel, n.stride,
                       n.size, gin.data());
          }
        }
        break;
      }
      case OpKind::kUpsample2: {
        auto& gin = grad_of(n.inputs[0]);
        const int half = n.size / 2;
        for (int ch = 0; ch < n.channels; ++ch) {
          for (int y = 0; y < n.size; ++y) {
            for (int x = 0; x < n.size; ++x) {
              gin[(static_cast<size_t>(ch) * half + y / 2) * half + x / 2] +=
                  g[i][(static_cast<size_t>(ch) * n.size + y) * n.size + x];
            }
          }
        }
        break;
      }
      case OpKind::kConcat: {
        auto& ga = grad_of(n.inputs[0]);
        auto& gb = grad_of(n.inputs[1]);
        for (size_t j = 0; j < ga.size(); ++j) ga[j] += g[i][j];
        for (size_t j = 0; j < gb.size(); ++j) gb[j] += g[i][ga.size() + j];
        break;
      }
      case OpKind::kInput:
        break;
    }
  }
}

BBox decode_box(double tx, double ty, double tw, double th, int cell_x, int cell_y,
                double stride, const AnchorSize& anchor) {
  const double cx = (2.0 * sigmoid(tx) - 0.5 + cell_x) * stride;
  const double cy = (2.0 * sigmoid(ty) - 0.5 + cell_y) * stride;
  const double sw = 2.0 * sigmoid(tw);
  const double sh = 2.0 * sigmoid(th);
  return from_center({cx, cy, sw * sw * anchor.w, sh * sh * anchor.h});
}

template <typename T>
std::vector<Detection> decode(const PredictionMap<T>& pred, const DetectorConfig& cfg,
                              double conf_thresh) {
  std::vector<Detection> dets;
  const double size = cfg.image_size;
  for (int s = 0; s < cfg.num_scales(); ++s) {
    const auto& sp = pred.scales[s];
    const double stride = cfg.strides[s];
    for (int y = 0; y < sp.grid; ++y) {
      for (int x = 0; x < sp.grid; ++x) {
        for (int a = 0; a < sp.anchors; ++a) {
          int best = 0;
          for (int k = 1; k < cfg.num_classes; ++k) {
            if (sp.at(y, x, a, 5 + k) > sp.at(y, x, a, 5 + best)) best = k;
          }
          const double score = sigmoid(static_cast<double>(sp.at(y, x, a, 4))) *
                               sigmoid(static_cast<double>(sp.at(y, x, a, 5 + best)));
          if (score < conf_thresh) continue;
          const BBox box = decode_box(sp.at(y, x, a, 0), sp.at(y, x, a, 1),
                                      sp.at(y, x, a, 2), sp.at(y, x, a, 3), x, y, stride,
                                      cfg.anchor_sizes[s][a]);
          dets.push_back({clip(box, size, size), best, score});
        }
      }
    }
  }
  return dets;
}

double anchor_ratio(double w, double h, const AnchorSize& anchor) {
  w = std::max(w, 1e-9);
  h = std::max(h, 1e-9);
  return std::max({w / anchor.w, anchor.w / w, h / anchor.h, anchor.h / h});
}

TargetMap assign_targets(std::span<const LabeledBox> gts, const DetectorConfig& cfg) {
  constexpr double kMaxRatio = 4.0;
  constexpr double kEdge = 1e-9;
  TargetMap tm;
  for (int s = 0; s < cfg.num_scales(); ++s) {
    ScaleTargets st;
    st.grid = cfg.grid(s);
    st.anchors = cfg.anchors_per_scale;
    const size_t slots = static_cast<size_t>(st.grid) * st.grid * st.anchors;
    st.mask.assign(slots, 0);
    st.boxes.assign(slots, BBox{});
    st.classes.assign(slots, -1);
    st.encoded.assign(slots, {0, 0, 0, 0});
    tm.scales.push_back(std::move(st));
  }

  // Canonical order makes the assignment independent of the input order.
  std::vector<LabeledBox> sorted(gts.begin(), gts.end());
  std::sort(sorted.begin(), sorted.end(), [](const LabeledBox& a, const LabeledBox& b) {
    return std::tie(a.class_id, a.box.x1, a.box.y1, a.box.x2, a.box.y2) <
           std::tie(b.class_id, b.box.x1, b.box.y1, b.box.x2, b.box.y2);
  });

  struct Candidate {
    double ratio;
    int scale;
    int anchor;
  };
  for (const LabeledBox& gt : sorted) {
    const CenterBox cb = to_center(gt.box);
    std::vector<Candidate> cands;
    for (int s = 0; s < cfg.num_scales(); ++s) {
      for (int a = 0; a < cfg.anchors_per_scale; ++a) {
        cands.push_back({anchor_ratio(cb.w, cb.h, cfg.anchor_sizes[s][a]), s, a});
      }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.ratio < b.ratio; });
    bool placed = false;
    for (const Candidate& c : cands) {
      ScaleTargets& st = tm.scales[c.scale];
      const double stride = cfg.strides[c.scale];
      const int gx = std::clamp(static_cast<int>(std::floor(cb.cx / stride)), 0, st.grid - 1);
      const int gy = std::clamp(static_cast<int>(std::floor(cb.cy / stride)), 0, st.grid - 1);
      const size_t idx = st.index(gy, gx, c.anchor);
      if (st.mask[idx]) continue;
      const AnchorSize& anchor = cfg.anchor_sizes[c.scale][c.anchor];
      if (c.ratio > kMaxRatio) ++tm.ratio_warnings;
      auto enc_offset = [&](double center, int cell) {
        const double p = (center / stride - cell + 0.5) / 2.0;
        return logit(std::clamp(p, kEdge, 1.0 - kEdge));
      };
      auto enc_size = [&](double len, double anchor_len) {
        const double p = std::sqrt(std::max(len, 0.0) / anchor_len) / 2.0;
        return logit(std::clamp(p, kEdge, 1.0 - kEdge));
      };
      st.mask[idx] = 1;
      st.boxes[idx] = gt.box;
      st.classes[idx] = gt.class_id;
      st.encoded[idx] = {enc_offset(cb.cx, gx), enc_offset(cb.cy, gy),
                         enc_size(cb.w, anchor.w), enc_size(cb.h, anchor.h)};
      ++tm.assigned;
      placed = true;
      break;
    }
    if (!placed) ++tm.dropped;
  }
  return tm;
}

template struct PredictionMap<float>;
template struct PredictionMap<double>;
template ParamSet<float> init_params<float>(const DetectorConfig&, uint64_t);
template ParamSet<double> init_params<double>(const DetectorConfig&, uint64_t);
template PredictionMap<float> forward<float>(const DetectorConfig&, const ParamSet<float>&,
                                             const Image&, ForwardCache<float>*);
template PredictionMap<double> forward<double>(const DetectorConfig&,
                                               const ParamSet<double>&, const Image&,
                                               ForwardCache<double>*);
template void backward<float>(const DetectorConfig&, const ParamSet<float>&,
                              const ForwardCache<float>&, const PredictionMap<float>&,
                              ParamSet<float>&);
template void backward<double>(const DetectorConfig&, const ParamSet<double>&,
                               const ForwardCache<double>&, const PredictionMap<double>&,
                               ParamSet<double>&);
template std::vector<Detection> decode<float>(const PredictionMap<float>&,
                                              const DetectorConfig&, double);
template std::vector<Detection> decode<double>(const PredictionMap<double>&,
                                               const DetectorConfig&, double);

}  // namespace ssda
