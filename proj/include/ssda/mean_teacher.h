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

#ifndef SSDA_MEAN_TEACHER_H_
#define SSDA_MEAN_TEACHER_H_

#include <cstdint>
#include <vector>

#include "ssda/detector.h"
#include "ssda/geometry.h"
#include "ssda/image.h"
#include "ssda/param_set.h"

namespace ssda {

// Teacher-filtered detections used as target-domain supervision.
struct PseudoLabelSet {
  std::vector<Detection> labels;
  int64_t source_step = 0;

  std::vector<LabeledBox> as_labels() const;
};

// EMA teacher. The running average is accumulated in double precision so the
// geometric decay law holds to double rounding; `weights()` is the float
// snapshot used for forward passes and refreshed after every update.
class TeacherState {
 public:
  TeacherState() = default;
  // Exact copy of the student.
  TeacherState(const ParamSet<float>& student, double gamma);

  void update(const ParamSet<float>& student);

  const ParamSet<double>& shadow() const { return shadow_; }
  const ParamSet<float>& weights() const { return weights_; }
  double gamma() const { return gamma_; }
  int64_t step_count() const { return step_count_; }
  // Replaces the parameters (e.g. when resuming from a teacher checkpoint).
  void load(const ParamSet<float>& params, int64_t step_count);
  void load(const ParamSet<double>& shadow, int64_t step_count);

 private:
  ParamSet<double> shadow_;
  ParamSet<float> weights_;
  double gamma_ = 0.99;
  int64_t step_count_ = 0;
};

// p_t <- gamma * p_t + (1 - gamma) * p_s for every parameter. Throws
// SchemaError when the student schema differs from the teacher's.
TeacherState ema_update(TeacherState teacher, const ParamSet<float>& student);

// Forward on `image` with the teacher weights, decode at a 0.001 confidence
// floor, class-wise NMS at tau_box, then drop scores below tau_cls.
PseudoLabelSet generate_pseudo_labels(const TeacherState& teacher, const Image& image,
                                      double tau_box, double tau_cls,
                                      const DetectorConfig& config);

// The filter stage on its own, applied to already decoded detections.
std::vector<Detection> filter_pseudo_labels(std::vector<Detection> decoded,
                                            double tau_box, double tau_cls);

inline constexpr double kPseudoLabelDecodeFloor = 0.001;

}  // namespace ssda

#endif  // SSDA_MEAN_TEACHER_H_
