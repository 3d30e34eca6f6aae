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

#include "ssda/losses.h"

#include <algorithm>
#include <cmath>

#include "ssda/errors.h"

namespace ssda {
namespace {

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct BoxGrad {
  double giou = 0.0;
  // d giou / d (x1, y1, x2, y2) of the predicted box.
  double d[4] = {0, 0, 0, 0};
};

BoxGrad giou_with_grad(const BBox& p, const BBox& g) {
  BoxGrad out;
  const double w = p.x2 - p.x1;
  const double h = p.y2 - p.y1;
  const double area_p = w * h;
  const double area_g = g.area();

  const double ix1 = std::max(p.x1, g.x1);
  const double ix2 = std::min(p.x2, g.x2);
  const double iy1 = std::max(p.y1, g.y1);
  const double iy2 = std::min(p.y2, g.y2);
  const double iw = ix2 - ix1;
  const double ih = iy2 - iy1;
  const bool overlap = iw > 0.0 && ih > 0.0;
  const double inter = overlap ? iw * ih : 0.0;
  const double uni = area_p + area_g - inter;

  const double cw = std::max(p.x2, g.x2) - std::min(p.x1, g.x1);
  const double ch = std::max(p.y2, g.y2) - std::min(p.y1, g.y1);
  const double enc = cw * ch;
  if (enc <= 0.0 || uni <= 0.0) return out;

  out.giou = inter / uni + uni / enc - 1.0;
  const double d_inter = 1.0 / uni;
  const double d_uni = -inter / (uni * uni) + 1.0 / enc;
  const double d_enc = -uni / (enc * enc);

  double di[4] = {0, 0, 0, 0};
  if (overlap) {
    if (p.x1 > g.x1) di[0] = -ih;
    if (p.y1 > g.y1) di[1] = -iw;
    if (p.x2 < g.x2) di[2] = ih;
    if (p.y2 < g.y2) di[3] = iw;
  }
  const double da[4] = {-h, -w, h, w};
  double dc[4] = {0, 0, 0, 0};
  if (p.x1 < g.x1) dc[0] = -ch;
  if (p.y1 < g.y1) dc[1] = -cw;
  if (p.x2 > g.x2) dc[2] = ch;
  if (p.y2 > g.y2) dc[3] = cw;
  for (int k = 0; k < 4; ++k) {
    out.d[k] = d_inter * di[k] + d_uni * (da[k] - di[k]) + d_enc * dc[k];
  }
  return out;
}

}  // namespace

std::string to_string(ConsistencyNorm norm) {
  return norm == ConsistencyNorm::kL1 ? "L1" : "L2";
}

ConsistencyNorm parse_consistency_norm(const std::string& text) {
  if (text == "L1" || text == "l1") return ConsistencyNorm::kL1;
  if (text == "L2" || text == "l2") return ConsistencyNorm::kL2;
  throw ConfigError("consistency norm must be L1 or L2, got '" + text + "'");
}

double focal_bce(double logit, double target, double gamma) {
  const double p = sigmoid(logit);
  const double q = sigmoid(-logit);
  const double log_p = -softplus(-logit);
  const double log_q = -softplus(logit);
  double loss = 0.0;
  if (target > 0.0) loss -= target * std::pow(q, gamma) * log_p;
  if (target < 1.0) loss -= (1.0 - target) * std::pow(p, gamma) * log_q;
  return loss;
}

double focal_bce_grad(double logit, double target, double gamma) {
  const double p = sigmoid(logit);
  const double q = sigmoid(-logit);
  const double log_p = -softplus(-logit);
  const double log_q = -softplus(logit);
  double grad = 0.0;
  if (target > 0.0) grad += target * std::pow(q, gamma) * (gamma * p * log_p - q);
  if (target < 1.0) {
    grad += (1.0 - target) * std::pow(p, gamma) * (p - gamma * q * log_q);
  }
  return grad;
}

template <typename T>
LossBreakdown detection_loss(const PredictionMap<T>& pred, const TargetMap& target,
                             const DetectorConfig& config, const LossWeights& weights,
                             PredictionMap<T>* grad, const ComponentScale& upstream) {
  if (pred.scales.size() != target.scales.size() ||
      static_cast<int>(pred.scales.size()) != config.num_scales()) {
    throw ConfigError("prediction and target maps have different scale counts");
  }
  for (size_t s = 0; s < pred.scales.size(); ++s) {
    if (pred.scales[s].grid != target.scales[s].grid ||
        pred.scales[s].anchors != target.scales[s].anchors ||
        pred.scales[s].channels != config.outputs_per_anchor()) {
      throw ConfigError("prediction and target maps disagree at scale " +
                        std::to_string(s));
    }
    if (grad && grad->scales.size() != pred.scales.size()) {
      throw ConfigError("gradient map shape differs from prediction map");
    }
  }

  int assigned = 0;
  for (const auto& st : target.scales) {
    for (uint8_t m : st.mask) assigned += m;
  }
  const double norm = 1.0 / std::max(1, assigned);
  const double gamma = weights.focal_gamma;
  const double kb = weights.lambda_box * norm;
  const double kc = weights.lambda_cls * norm;
  const double ko = weights.lambda_obj * norm;

  double box_sum = 0.0;
  double cls_sum = 0.0;
  double obj_sum = 0.0;
  for (size_t s = 0; s < pred.scales.size(); ++s) {
    const auto& sp = pred.scales[s];
    const auto& st = target.scales[s];
    const double stride = config.strides[s];
    auto* gs = grad ? &grad->scales[s] : nullptr;
    for (int y = 0; y < sp.grid; ++y) {
      for (int x = 0; x < sp.grid; ++x) {
        for (int a = 0; a < sp.anchors; ++a) {
          const size_t slot = st.index(y, x, a);
          const bool pos = st.mask[slot] != 0;
          const double obj_logit = sp.at(y, x, a, 4);
          obj_sum += focal_bce(obj_logit, pos ? 1.0 : 0.0, gamma);
          if (gs) {
            gs->at(y, x, a, 4) += static_cast<T>(
                upstream.obj * ko * focal_bce_grad(obj_logit, pos ? 1.0 : 0.0, gamma));
          }
          if (!pos) continue;

          const AnchorSize& anchor = config.anchor_sizes[s][a];
          const double sx = sigmoid(sp.at(y, x, a, 0));
          const double sy = sigmoid(sp.at(y, x, a, 1));
          const double sw = sigmoid(sp.at(y, x, a, 2));
          const double sh = sigmoid(sp.at(y, x, a, 3));
          const double cx = (2.0 * sx - 0.5 + x) * stride;
          const double cy = (2.0 * sy - 0.5 + y) * stride;
          const double pw = 4.0 * sw * sw * anchor.w;
          const double ph = 4.0 * sh * sh * anchor.h;
          const BBox pbox{cx - 0.5 * pw, cy - 0.5 * ph, cx + 0.5 * pw, cy + 0.5 * ph};
          const BoxGrad bg = giou_with_grad(pbox, st.boxes[slot]);
          box_sum += 1.0 - bg.giou;

          const int cls = st.classes[slot];
          for (int k = 0; k < config.num_classes; ++k) {
            const double t = k == cls ? 1.0 : 0.0;
            const double logit = sp.at(y, x, a, 5 + k);
            cls_sum += focal_bce(logit, t, gamma);
            if (gs) {
              gs->at(y, x, a, 5 + k) +=
                  static_cast<T>(upstream.cls * kc * focal_bce_grad(logit, t, gamma));
            }
          }

          if (gs) {
            // d(1 - giou) = -d giou, chained through the decode transform.
            const double scale = -upstream.box * kb;
            const double d_cx = bg.d[0] + bg.d[2];
            const double d_cy = bg.d[1] + bg.d[3];
            const double d_w = 0.5 * (bg.d[2] - bg.d[0]);
            const double d_h = 0.5 * (bg.d[3] - bg.d[1]);
            gs->at(y, x, a, 0) +=
                static_cast<T>(scale * d_cx * 2.0 * stride * sx * (1.0 - sx));
            gs->at(y, x, a, 1) +=
                static_cast<T>(scale * d_cy * 2.0 * stride * sy * (1.0 - sy));
            gs->at(y, x, a, 2) +=
                static_cast<T>(scale * d_w * 8.0 * sw * sw * (1.0 - sw) * anchor.w);
            gs->at(y, x, a, 3) +=
                static_cast<T>(scale * d_h * 8.0 * sh * sh * (1.0 - sh) * anchor.h);
          }
        }
      }
    }
  }
  return {kb * box_sum, kc * cls_sum, ko * obj_sum};
}

template <typename T>
LossBreakdown distillation_body(const PredictionMap<T>& student_pred,
                                const PseudoLabelSet& pseudo,
                                const DetectorConfig& config, const LossWeights& weights,
                                PredictionMap<T>* grad, const ComponentScale& upstream) {
  const std::vector<LabeledBox> labels = pseudo.as_labels();
  const TargetMap target = assign_targets(labels, config);
  return detection_loss(student_pred, target, config, weights, grad, upstream);
}

double consistency_loss(const LossBreakdown& a, const LossBreakdown& b,
                        ConsistencyNorm norm) {
  const double d[3] = {a.box - b.box, a.cls - b.cls, a.obj - b.obj};
  if (norm == ConsistencyNorm::kL1) {
    return std::abs(d[0]) + std::abs(d[1]) + std::abs(d[2]);
  }
  return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

std::pair<ComponentScale, ComponentScale> consistency_grad(const LossBreakdown& a,
                                                           const LossBreakdown& b,
                                                           ConsistencyNorm norm) {
  const double d[3] = {a.box - b.box, a.cls - b.cls, a.obj - b.obj};
  double g[3] = {0, 0, 0};
  if (norm == ConsistencyNorm::kL1) {
    for (int k = 0; k < 3; ++k) g[k] = (d[k] > 0.0) - (d[k] < 0.0);
  } else {
    const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (len > 0.0) {
      for (int k = 0; k < 3; ++k) g[k] = d[k] / len;
    }
  }
  return {ComponentScale{g[0], g[1], g[2]}, ComponentScale{-g[0], -g[1], -g[2]}};
}

double total_loss(const LossBreakdown& det_src, const LossBreakdown& det_fake_src,
                  const LossBreakdown& dis, double con, const LossWeights& weights) {
  return det_src.det_total() + det_fake_src.det_total() +
         weights.alpha * dis.det_total() + weights.beta * con;
}

template LossBreakdown detection_loss<float>(const PredictionMap<float>&, const TargetMap&,
                                             const DetectorConfig&, const LossWeights&,
                                             PredictionMap<float>*, const ComponentScale&);
template LossBreakdown detection_loss<double>(const PredictionMap<double>&,
                                              const TargetMap&, const DetectorConfig&,
                                              const LossWeights&, PredictionMap<double>*,
                                              const ComponentScale&);
template LossBreakdown distillation_body<float>(const PredictionMap<float>&,
                                                const PseudoLabelSet&,
                                                const DetectorConfig&, const LossWeights&,
                                                PredictionMap<float>*,
                                                const ComponentScale&);
template LossBreakdown distillation_body<double>(const PredictionMap<double>&,
                                                 const PseudoLabelSet&,
                                                 const DetectorConfig&, const LossWeights&,
                                                 PredictionMap<double>*,
                                                 const ComponentScale&);

}  // namespace ssda
