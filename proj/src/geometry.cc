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

#include "ssda/geometry.h"

#include <algorithm>
#include <numeric>

namespace ssda {

double BBox::area() const {
  return std::max(0.0, x2 - x1) * std::max(0.0, y2 - y1);
}

CenterBox to_center(const BBox& b) {
  return {(b.x1 + b.x2) * 0.5, (b.y1 + b.y2) * 0.5, b.x2 - b.x1, b.y2 - b.y1};
}

BBox from_center(const CenterBox& c) {
  return {c.cx - c.w * 0.5, c.cy - c.h * 0.5, c.cx + c.w * 0.5,
          c.cy + c.h * 0.5};
}

BBox clip(const BBox& b, double width, double height) {
  auto clamp = [](double v, double hi) { return std::clamp(v, 0.0, hi); };
  return {clamp(b.x1, width), clamp(b.y1, height), clamp(b.x2, width),
          clamp(b.y2, height)};
}

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

double giou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  const double enclosing = (std::max(a.x2, b.x2) - std::min(a.x1, b.x1)) *
                           (std::max(a.y2, b.y2) - std::min(a.y1, b.y1));
  if (enclosing <= 0.0) return 0.0;
  const double iou_value = uni > 0.0 ? inter / uni : 0.0;
  return iou_value - (enclosing - uni) / enclosing;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_thresh) {
  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return dets[a].score > dets[b].score;
  });

  std::vector<Detection> kept;
  for (size_t idx : order) {
    const Detection& d = dets[idx];
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (k.class_id == d.class_id && iou(k.box, d.box) > iou_thresh) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

}  // namespace ssda
