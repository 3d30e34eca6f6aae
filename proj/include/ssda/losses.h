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

#ifndef SSDA_LOSSES_H_
#define SSDA_LOSSES_H_

#include <string>
#include <utility>

#include "ssda/detector.h"
#include "ssda/mean_teacher.h"

namespace ssda {

struct LossBreakdown {
  double box = 0.0;
  double cls = 0.0;
  double obj = 0.0;

  double det_total() const { return box + cls + obj; }
  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

enum class ConsistencyNorm { kL1, kL2 };

std::string to_string(ConsistencyNorm norm);
ConsistencyNorm parse_consistency_norm(const std::string& text);

struct LossWeights {
  double alpha = 0.005;
  double beta = 2.0;
  ConsistencyNorm con_norm = ConsistencyNorm::kL2;
  double lambda_box = 0.05;
  double lambda_cls = 0.5;
  double lambda_obj = 1.0;
  double focal_gamma = 2.0;
};

// Upstream derivative of the final objective with respect to each loss
// component; backward passes scale the component gradients by these.
struct ComponentScale {
  double box = 1.0;
  double cls = 1.0;
  double obj = 1.0;
};

// Supervised detection loss. With N = max(1, assigned slots):
//   box = lambda_box / N * sum_assigned (1 - GIoU(decoded pred, gt))
//   cls = lambda_cls / N * sum_assigned sum_classes FL(logit, one-hot)
//   obj = lambda_obj / N * sum_all_slots FL(objectness, mask)
// where FL is focal-modulated BCE (no positive/negative alpha balancing).
// When `grad` is non-null, d(upstream . components)/d(pred) is added to it.
template <typename T>
LossBreakdown detection_loss(const PredictionMap<T>& pred, const TargetMap& target,
                             const DetectorConfig& config, const LossWeights& weights,
                             PredictionMap<T>* grad = nullptr,
                             const ComponentScale& upstream = {});

// Detection loss of the student on a target image against teacher
// pseudo-labels (converted to targets with assign_targets).
template <typename T>
LossBreakdown distillation_body(const PredictionMap<T>& student_pred,
                                const PseudoLabelSet& pseudo,
                                const DetectorConfig& config, const LossWeights& weights,
                                PredictionMap<T>* grad = nullptr,
                                const ComponentScale& upstream = {});

// Norm of the difference between the (box, cls, obj) vectors.
double consistency_loss(const LossBreakdown& a, const LossBreakdown& b,
                        ConsistencyNorm norm);

// Partial derivatives of consistency_loss with respect to the components of
// `a` and of `b`. At a == b the subgradient 0 is used.
std::pair<ComponentScale, ComponentScale> consistency_grad(const LossBreakdown& a,
                                                           const LossBreakdown& b,
                                                           ConsistencyNorm norm);

double total_loss(const LossBreakdown& det_src, const LossBreakdown& det_fake_src,
                  const LossBreakdown& dis, double con, const LossWeights& weights);

// Focal BCE on one logit and its derivative; exposed for tests.
double focal_bce(double logit, double target, double gamma);
double focal_bce_grad(double logit, double target, double gamma);

}  // namespace ssda

#endif  // SSDA_LOSSES_H_
