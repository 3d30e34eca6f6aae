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

#ifndef SSDA_GEOMETRY_H_
#define SSDA_GEOMETRY_H_

#include <span>
#include <vector>

namespace ssda {

// Axis-aligned box in corner form, pixel units. Corner form is canonical;
// center form only appears at the label-file and decode boundaries.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const;
  bool valid() const { return x1 <= x2 && y1 <= y2; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct CenterBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
};

CenterBox to_center(const BBox& b);
BBox from_center(const CenterBox& c);

// Intersects `b` with [0, width] x [0, height].
BBox clip(const BBox& b, double width, double height);

struct Detection {
  BBox box;
  int class_id = 0;
  double score = 0.0;
};

struct LabeledBox {
  BBox box;
  int class_id = 0;

  friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

double intersection_area(const BBox& a, const BBox& b);

// |a ∩ b| / |a ∪ b|, or 0 when the union is empty.
double iou(const BBox& a, const BBox& b);

// IoU minus the empty fraction of the smallest enclosing box; 0 when the
// enclosing box has zero area.
double giou(const BBox& a, const BBox& b);

// Greedy class-wise suppression. Detections are visited by descending score
// (ties by input position) and kept when their IoU with every kept detection
// of the same class is <= iou_thresh. Output is in visiting order.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_thresh);

}  // namespace ssda

#endif  // SSDA_GEOMETRY_H_
