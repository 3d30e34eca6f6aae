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

#ifndef SSDA_DETECTOR_H_
#define SSDA_DETECTOR_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssda/geometry.h"
#include "ssda/image.h"
#include "ssda/param_set.h"

namespace ssda {

struct AnchorSize {
  double w = 0.0;
  double h = 0.0;
  friend bool operator==(const AnchorSize&, const AnchorSize&) = default;
};

// Compact single-stage detector. The backbone is a chain of stride-2 3x3
// convolutions (one stage per power of two up to the largest stride), each
// optionally followed by `stage_repeats[i]` stride-1 3x3 convolutions. Head
// levels are fused top-down by nearest upsampling, concatenation and a
// `fuse_kernel` convolution; each level ends in a 1x1 prediction conv.
struct DetectorConfig {
  int image_size = 96;
  std::vector<int> strides = {8, 16, 32};
  int anchors_per_scale = 3;
  std::vector<std::vector<AnchorSize>> anchor_sizes = {
      {{8, 8}, {12, 12}, {16, 16}},
      {{20, 20}, {26, 26}, {32, 32}},
      {{40, 40}, {52, 52}, {64, 64}}};
  int num_classes = 3;
  std::vector<int> channel_widths = {16, 32, 48, 64, 96};
  std::vector<int> stage_repeats = {0, 0, 1, 1, 1};
  int fuse_kernel = 3;

  // Throws ConfigError describing the first violated invariant.
  void validate() const;

  int outputs_per_anchor() const { return 5 + num_classes; }
  int num_scales() const { return static_cast<int>(strides.size()); }
  int grid(int scale) const { return image_size / strides[scale]; }
  // Number of (cell, anchor) slots over all scales.
  int total_slots() const;

  // Tiny configuration for finite-difference checks (image 32, < 5k params).
  static DetectorConfig tiny(int num_classes = 3);

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

std::string serialize_detector_config(const DetectorConfig& cfg);
DetectorConfig parse_detector_config(const std::string& text);

// Raw head outputs of one scale laid out as (grid, grid, anchors, 5 + c):
// t_x, t_y, t_w, t_h, objectness, class logits.
template <typename T>
struct ScalePrediction {
  int grid = 0;
  int anchors = 0;
  int channels = 0;
  std::vector<T> values;

  size_t index(int y, int x, int a, int k) const {
    return ((static_cast<size_t>(y) * grid + x) * anchors + a) * channels + k;
  }
  T& at(int y, int x, int a, int k) { return values[index(y, x, a, k)]; }
  T at(int y, int x, int a, int k) const { return values[index(y, x, a, k)]; }
};

template <typename T>
struct PredictionMap {
  std::vector<ScalePrediction<T>> scales;

  static PredictionMap zeros(const DetectorConfig& cfg);
  size_t total_values() const;
};

struct ScaleTargets {
  int grid = 0;
  int anchors = 0;
  std::vector<uint8_t> mask;
  std::vector<BBox> boxes;
  std::vector<int> classes;
  // Logit-space targets (t_x, t_y, t_w, t_h) that decode to `boxes`.
  std::vector<std::array<double, 4>> encoded;

  size_t index(int y, int x, int a) const {
    return (static_cast<size_t>(y) * grid + x) * anchors + a;
  }
};

struct TargetMap {
  std::vector<ScaleTargets> scales;
  int assigned = 0;
  // Objects whose size ratio to the chosen anchor exceeds the decode range.
  int ratio_warnings = 0;
  // Objects that found no free (scale, cell, anchor) slot.
  int dropped = 0;
};

ParamSchema detector_schema(const DetectorConfig& cfg);
size_t parameter_count(const DetectorConfig& cfg);

// Fan-in scaled uniform weights, zero biases except the objectness biases
// which start at logit(0.01). Deterministic in `seed`.
template <typename T>
ParamSet<T> init_params(const DetectorConfig& cfg, uint64_t seed);

// Activations kept by forward() for backward().
template <typename T>
struct ForwardCache {
  std::vector<std::vector<T>> outputs;
  std::vector<std::vector<T>> preacts;
  std::vector<std::vector<T>> cols;
};

// The network carries no normalization layers, so training and evaluation
// mode forwards coincide.
template <typename T>
PredictionMap<T> forward(const DetectorConfig& cfg, const ParamSet<T>& params,
                         const Image& image, ForwardCache<T>* cache = nullptr);

// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(prediction).
template <typename T>
void backward(const DetectorConfig& cfg, const ParamSet<T>& params,
              const ForwardCache<T>& cache, const PredictionMap<T>& grad_pred,
              ParamSet<T>& grads);

// YOLO-style bounded decode of one slot.
BBox decode_box(double tx, double ty, double tw, double th, int cell_x,
                int cell_y, double stride, const AnchorSize& anchor);

template <typename T>
std::vector<Detection> decode(const PredictionMap<T>& pred,
                              const DetectorConfig& cfg, double conf_thresh);

TargetMap assign_targets(std::span<const LabeledBox> gts,
                         const DetectorConfig& cfg);

// Anchor shape mismatch used for assignment: the worst of the four
// width/height ratios in either direction (1 is a perfect match).
double anchor_ratio(double w, double h, const AnchorSize& anchor);

}  // namespace ssda

#endif  // SSDA_DETECTOR_H_
