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

#ifndef SSDA_EVAL_METRICS_H_
#define SSDA_EVAL_METRICS_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssda/config.h"
#include "ssda/geometry.h"

namespace ssda {

enum class ApInterpolation { kAllPoint, kElevenPoint };

std::string to_string(ApInterpolation mode);
ApInterpolation parse_ap_interpolation(const std::string& text);

// Per-class AP in [0, 1] for a single image. Classes with neither
// ground truth nor detections are absent from the map.
std::map<int, double> average_precision(std::span<const Detection> dets,
                                        std::span<const LabeledBox> gts, double iou_thresh,
                                        ApInterpolation interp = ApInterpolation::kAllPoint);

using DetectionsById = std::map<std::string, std::vector<Detection>>;
using GroundTruthById = std::map<std::string, std::vector<LabeledBox>>;

struct EvalReport {
  std::map<int, double> ap50;  // per class, x100
  double map50 = 0.0;
  double map75 = 0.0;
  double map50_95 = 0.0;
  std::optional<double> gain;
  std::optional<double> rel;
  int images = 0;
  int gt_objects = 0;
  int detections = 0;
};

// Matching is per image; ranking is global per class with ties broken by
// (image id, position). A detection for an id absent from `gts` is fatal.
EvalReport map_report(const DetectionsById& dets, const GroundTruthById& gts,
                      ApInterpolation interp = ApInterpolation::kAllPoint);

// AP of one class at one IoU threshold over all images, in [0, 1].
double class_ap(const DetectionsById& dets, const GroundTruthById& gts, int class_id,
                double iou_thresh, ApInterpolation interp = ApInterpolation::kAllPoint);

struct GainRel {
  double gain = 0.0;
  std::optional<double> rel;  // absent when the oracle mAP is not positive
};

GainRel gain_rel(double map_method, double map_source_only, double map_oracle);

// Fills report.gain / report.rel from reference mAP50 values.
void attach_gain_rel(EvalReport& report, std::optional<double> source_only_map50,
                     std::optional<double> oracle_map50);

std::string format_report_table(const EvalReport& report, const std::string& method,
                                const std::vector<std::string>& class_names = {});
KeyValues report_to_kv(const EvalReport& report);

// Detection files: one "class_id score cx cy w h" line per detection,
// center-normalized like label files.
std::vector<Detection> parse_detections(const std::string& text, int width, int height,
                                        const std::string& source_name);
std::string format_detections(const std::vector<Detection>& dets, int width, int height);

}  // namespace ssda

#endif  // SSDA_EVAL_METRICS_H_
