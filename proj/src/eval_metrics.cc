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

#include "ssda/eval_metrics.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include "ssda/errors.h"

namespace ssda {
namespace {

struct Ranked {
  double score;
  const std::string* image;
  size_t index;
  const Detection* det;
};

double interpolate(const std::vector<double>& precision, const std::vector<double>& recall,
                   ApInterpolation interp) {
  if (precision.empty()) return 0.0;
  if (interp == ApInterpolation::kElevenPoint) {
    double sum = 0.0;
    for (int i = 0; i <= 10; ++i) {
      const double r = i / 10.0;
      double best = 0.0;
      for (size_t k = 0; k < recall.size(); ++k) {
        if (recall[k] >= r) best = std::max(best, precision[k]);
      }
      sum += best;
    }
    return sum / 11.0;
  }
  // Precision envelope, then area over recall steps.
  std::vector<double> env(precision.size() + 2, 0.0);
  std::vector<double> rec(recall.size() + 2, 0.0);
  for (size_t i = 0; i < precision.size(); ++i) {
    env[i + 1] = precision[i];
    rec[i + 1] = recall[i];
  }
  rec.back() = 1.0;
  for (size_t i = env.size() - 1; i > 0; --i) env[i - 1] = std::max(env[i - 1], env[i]);
  double ap = 0.0;
  for (size_t i = 1; i < rec.size(); ++i) {
    if (rec[i] != rec[i - 1]) ap += (rec[i] - rec[i - 1]) * env[i];
  }
  return ap;
}

void check_ids(const DetectionsById& dets, const GroundTruthById& gts) {
  for (const auto& [id, list] : dets) {
    if (!gts.count(id)) {
      throw ConfigError("detections reference unknown image id '" + id + "'");
    }
  }
}

std::set<int> classes_present(const DetectionsById& dets, const GroundTruthById& gts) {
  std::set<int> classes;
  for (const auto& [id, list] : dets) {
    for (const Detection& d : list) classes.insert(d.class_id);
  }
  for (const auto& [id, list] : gts) {
    for (const LabeledBox& g : list) classes.insert(g.class_id);
  }
  return classes;
}

}  // namespace

std::string to_string(ApInterpolation mode) {
  return mode == ApInterpolation::kAllPoint ? "all_point" : "eleven_point";
}

ApInterpolation parse_ap_interpolation(const std::string& text) {
  if (text == "all_point") return ApInterpolation::kAllPoint;
  if (text == "eleven_point") return ApInterpolation::kElevenPoint;
  throw ConfigError("unknown AP interpolation '" + text + "' (all_point|eleven_point)");
}

double class_ap(const DetectionsById& dets, const GroundTruthById& gts, int class_id,
                double iou_thresh, ApInterpolation interp) {
  check_ids(dets, gts);
  int num_gt = 0;
  std::map<std::string, std::vector<const LabeledBox*>> gt_by_image;
  for (const auto& [id, list] : gts) {
    for (const LabeledBox& g : list) {
      if (g.class_id == class_id) {
        gt_by_image[id].push_back(&g);
        ++num_gt;
      }
    }
  }
  std::vector<Ranked> ranked;
  for (const auto& [id, list] : dets) {
    for (size_t i = 0; i < list.size(); ++i) {
      if (list[i].class_id == class_id) ranked.push_back({list[i].score, &id, i, &list[i]});
    }
  }
  if (ranked.empty() || num_gt == 0) return 0.0;
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(*a.image, a.index) < std::tie(*b.image, b.index);
  });

  std::map<std::string, std::vector<bool>> used;
  for (const auto& [id, list] : gt_by_image) used[id].assign(list.size(), false);

  std::vector<double> precision, recall;
  precision.reserve(ranked.size());
  recall.reserve(ranked.size());
  int tp = 0;
  int seen = 0;
  for (const Ranked& r : ranked) {
    ++seen;
    auto it = gt_by_image.find(*r.image);
    if (it != gt_by_image.end()) {
      std::vector<bool>& taken = used[*r.image];
      double best = -1.0;
      size_t best_k = 0;
      for (size_t k = 0; k < it->second.size(); ++k) {
        if (taken[k]) continue;
        const double v = iou(r.det->box, it->second[k]->box);
        if (v > best) {
          best = v;
          best_k = k;
        }
      }
      if (best >= iou_thresh) {
        taken[best_k] = true;
        ++tp;
      }
    }
    precision.push_back(static_cast<double>(tp) / seen);
    recall.push_back(static_cast<double>(tp) / num_gt);
  }
  return interpolate(precision, recall, interp);
}

std::map<int, double> average_precision(std::span<const Detection> dets,
                                        std::span<const LabeledBox> gts, double iou_thresh,
                                        ApInterpolation interp) {
  const DetectionsById d{{"image", std::vector<Detection>(dets.begin(), dets.end())}};
  const GroundTruthById g{{"image", std::vector<LabeledBox>(gts.begin(), gts.end())}};
  std::map<int, double> out;
  for (int c : classes_present(d, g)) out[c] = class_ap(d, g, c, iou_thresh, interp);
  return out;
}

EvalReport map_report(const DetectionsById& dets, const GroundTruthById& gts,
                      ApInterpolation interp) {
  check_ids(dets, gts);
  EvalReport report;
  report.images = static_cast<int>(gts.size());
  for (const auto& [id, list] : gts) report.gt_objects += static_cast<int>(list.size());
  for (const auto& [id, list] : dets) report.detections += static_cast<int>(list.size());

  const std::set<int> classes = classes_present(dets, gts);
  if (classes.empty()) return report;
  double sum50 = 0.0, sum75 = 0.0, sum_range = 0.0;
  for (int c : classes) {
    const double ap50 = class_ap(dets, gts, c, 0.5, interp);
    report.ap50[c] = 100.0 * ap50;
    sum50 += ap50;
    double range = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double thresh = 0.5 + 0.05 * k;
      const double ap = k == 0 ? ap50 : class_ap(dets, gts, c, thresh, interp);
      if (k == 5) sum75 += ap;
      range += ap;
    }
    sum_range += range / 10.0;
  }
  const double n = static_cast<double>(classes.size());
  report.map50 = 100.0 * sum50 / n;
  report.map75 = 100.0 * sum75 / n;
  report.map50_95 = 100.0 * sum_range / n;
  return report;
}

GainRel gain_rel(double map_method, double map_source_only, double map_oracle) {
  GainRel out;
  out.gain = map_method - map_source_only;
  if (map_oracle > 0.0) out.rel = 100.0 * map_method / map_oracle;
  return out;
}

void attach_gain_rel(EvalReport& report, std::optional<double> source_only_map50,
                     std::optional<double> oracle_map50) {
  const GainRel gr = gain_rel(report.map50, source_only_map50.value_or(report.map50),
                              oracle_map50.value_or(0.0));
  if (source_only_map50) report.gain = gr.gain;
  if (oracle_map50) report.rel = gr.rel;
}

std::string format_report_table(const EvalReport& report, const std::string& method,
                                const std::vector<std::string>& class_names) {
  std::ostringstream out;
  char buf[256];
  out << "Method";
  for (const auto& [c, ap] : report.ap50) {
    out << " | "
        << (c < static_cast<int>(class_names.size()) ? class_names[c]
                                                     : "class" + std::to_string(c));
  }
  out << " | mAP50 | mAP75 | mAP50:95 | Gain | Rel.\n";
  out << method;
  for (const auto& [c, ap] : report.ap50) {
    std::snprintf(buf, sizeof(buf), " | %.1f", ap);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), " | %.1f | %.1f | %.1f", report.map50, report.map75,
                report.map50_95);
  out << buf;
  if (report.gain) {
    std::snprintf(buf, sizeof(buf), " | %+.1f", *report.gain);
    out << buf;
  } else {
    out << " | -";
  }
  if (report.rel) {
    std::snprintf(buf, sizeof(buf), " | %.1f", *report.rel);
    out << buf;
  } else {
    out << " | -";
  }
  out << "\n";
  return out.str();
}

KeyValues report_to_kv(const EvalReport& report) {
  KeyValues kv;
  kv.set("images", std::to_string(report.images));
  kv.set("gt_objects", std::to_string(report.gt_objects));
  kv.set("detections", std::to_string(report.detections));
  kv.set("mAP50", format_double(report.map50));
  kv.set("mAP75", format_double(report.map75));
  kv.set("mAP50_95", format_double(report.map50_95));
  for (const auto& [c, ap] : report.ap50) {
    kv.set("ap50.class" + std::to_string(c), format_double(ap));
  }
  if (report.gain) kv.set("gain", format_double(*report.gain));
  if (report.rel) kv.set("rel", format_double(*report.rel));
  return kv;
}

std::vector<Detection> parse_detections(const std::string& text, int width, int height,
                                        const std::string& source_name) {
  std::vector<Detection> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = source_name + ":" + std::to_string(line_no) + ": ";
    std::istringstream fields(line);
    std::vector<std::string> tok;
    std::string t;
    while (fields >> t) tok.push_back(t);
    if (tok.size() != 6) {
      throw ParseError(where + "expected 6 fields (class_id score cx cy w h), got " +
                       std::to_string(tok.size()));
    }
    Detection d;
    double v[5];
    try {
      d.class_id = parse_int("class_id", tok[0]);
      for (int k = 0; k < 5; ++k) v[k] = parse_double("value", tok[k + 1]);
    } catch (const ConfigError& e) {
      throw ParseError(where + e.what());
    }
    if (d.class_id < 0) throw ParseError(where + "class_id must be non-negative");
    for (int k = 0; k < 5; ++k) {
      if (!(v[k] >= 0.0 && v[k] <= 1.0)) {
        throw ParseError(where + "value '" + tok[k + 1] + "' outside [0, 1]");
      }
    }
    d.score = v[0];
    d.box = clip(from_center({v[1] * width, v[2] * height, v[3] * width, v[4] * height}),
                 width, height);
    out.push_back(d);
  }
  return out;
}

std::string format_detections(const std::vector<Detection>& dets, int width, int height) {
  std::string out;
  char buf[160];
  for (const Detection& d : dets) {
    const CenterBox c = to_center(d.box);
    std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f %.6f\n", d.class_id, d.score,
                  c.cx / width, c.cy / height, c.w / width, c.h / height);
    out += buf;
  }
  return out;
}

}  // namespace ssda
