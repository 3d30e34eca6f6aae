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

#include "ssda/mean_teacher.h"

#include <algorithm>

#include "ssda/errors.h"

namespace ssda {

std::vector<LabeledBox> PseudoLabelSet::as_labels() const {
  std::vector<LabeledBox> out;
  out.reserve(labels.size());
  for (const Detection& d : labels) out.push_back({d.box, d.class_id});
  return out;
}

TeacherState::TeacherState(const ParamSet<float>& student, double gamma)
    : shadow_(student.cast<double>()), weights_(student), gamma_(gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ConfigError("EMA gamma must lie in (0, 1)");
  }
}

void TeacherState::update(const ParamSet<float>& student) {
  if (!shadow_.same_schema(student)) {
    throw SchemaError("EMA update with mismatched schema: " +
                      describe_schema_mismatch(shadow_.schema(), student.schema()));
  }
  const double keep = gamma_;
  const double take = 1.0 - gamma_;
  for (size_t i = 0; i < shadow_.size(); ++i) {
    auto& t = shadow_[i].values;
    auto& w = weights_[i].values;
    const auto& s = student[i].values;
    for (size_t j = 0; j < t.size(); ++j) {
      t[j] = keep * t[j] + take * static_cast<double>(s[j]);
      w[j] = static_cast<float>(t[j]);
    }
  }
  ++step_count_;
  shadow_.bump_version();
  weights_.set_version(shadow_.version());
}

void TeacherState::load(const ParamSet<float>& params, int64_t step_count) {
  if (!weights_.same_schema(params)) {
    throw SchemaError("teacher checkpoint schema differs from the student's");
  }
  weights_ = params;
  shadow_ = params.cast<double>();
  step_count_ = step_count;
}

void TeacherState::load(const ParamSet<double>& shadow, int64_t step_count) {
  if (!weights_.same_schema(shadow)) {
    throw SchemaError("teacher checkpoint schema differs from the student's");
  }
  shadow_ = shadow;
  weights_ = shadow.cast<float>();
  step_count_ = step_count;
}

TeacherState ema_update(TeacherState teacher, const ParamSet<float>& student) {
  teacher.update(student);
  return teacher;
}

std::vector<Detection> filter_pseudo_labels(std::vector<Detection> decoded,
                                            double tau_box, double tau_cls) {
  std::vector<Detection> kept = nms(decoded, tau_box);
  std::erase_if(kept, [&](const Detection& d) { return d.score < tau_cls; });
  return kept;
}

PseudoLabelSet generate_pseudo_labels(const TeacherState& teacher, const Image& image,
                                      double tau_box, double tau_cls,
                                      const DetectorConfig& config) {
  if (tau_box < 0.0 || tau_box > 1.0 || tau_cls < 0.0 || tau_cls > 1.0) {
    throw ConfigError("pseudo-label thresholds must lie in [0, 1]");
  }
  const PredictionMap<float> pred = forward(config, teacher.weights(), image);
  PseudoLabelSet out;
  out.labels = filter_pseudo_labels(decode(pred, config, kPseudoLabelDecodeFloor),
                                    tau_box, tau_cls);
  out.source_step = teacher.step_count();
  return out;
}

}  // namespace ssda
