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

#ifndef SSDA_TRAINER_H_
#define SSDA_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssda/checkpoint.h"
#include "ssda/config.h"
#include "ssda/detector.h"
#include "ssda/domain_data.h"
#include "ssda/eval_metrics.h"
#include "ssda/losses.h"
#include "ssda/mean_teacher.h"
#include "ssda/param_set.h"

namespace ssda {

enum class TrainMode { kSourceOnly, kBase, kBaseD, kBaseC, kBaseDC, kOracle };
enum class TeacherInput { kRawTarget, kFakeTarget };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& text);
std::string to_string(TeacherInput input);
TeacherInput parse_teacher_input(const std::string& text);

// Student-side augmentation. The teacher input is only letterboxed.
struct AugmentPolicy {
  double flip_prob = 0.5;
  double brightness = 0.1;  // additive shift drawn from [-b, b]
  double contrast = 0.2;    // factor drawn from [1 - c, 1 + c]
};

struct TrainConfig {
  DetectorConfig detector;
  int epochs = 40;
  int batch_pairs = 4;
  double lr0 = 0.01;
  double lrf = 0.05;  // final lr as a fraction of lr0 (cosine decay)
  double momentum = 0.937;
  double weight_decay = 5e-4;
  double warmup_epochs = 3.0;
  double grad_clip = 10.0;  // global L2 norm; <= 0 disables
  LossWeights loss;
  double gamma = 0.99;
  double tau_box = 0.3;
  double tau_cls = 0.8;
  int64_t ema_start_step = 0;
  uint64_t seed = 0;
  TrainMode mode = TrainMode::kBaseDC;
  TeacherInput teacher_input = TeacherInput::kFakeTarget;
  AugmentPolicy augment;
  int eval_every = 1;        // epochs; 0 evaluates only after the last epoch
  int checkpoint_every = 10; // epochs; 0 keeps only the final checkpoint
  double eval_conf = 0.001;
  double eval_iou = 0.6;
  double infer_conf = 0.25;
  double infer_iou = 0.45;

  void validate() const;
  // Weights actually applied after ablation gating.
  double effective_alpha() const;
  double effective_beta() const;
  bool uses_teacher() const;
  bool uses_fake_source() const;
  // Fingerprint over everything that shapes the optimization trajectory.
  // The epoch count is part of it because it sets the cosine schedule.
  std::string hash() const;
};

void write_train_config(KeyValues& kv, const TrainConfig& cfg);
TrainConfig read_train_config(const KeyValues& kv, TrainConfig defaults = {});

// SGD with Nesterov momentum; weight decay applies to `.weight` tensors only.
struct SgdState {
  ParamSet<float> velocity;
};

struct StepRecord {
  int64_t step = 0;
  LossBreakdown src;       // branch on I^s
  LossBreakdown fake_src;  // branch on I^s_f
  double dis = 0.0;        // det_total of the distillation body
  double con = 0.0;
  double total = 0.0;
  int pseudo_labels = 0;
};

inline constexpr const char* kLossLogHeader = "step,box,cls,obj,dis,con,total";
std::string format_step_record(const StepRecord& r);

struct TrainState {
  ParamSet<float> student;
  TeacherState teacher;
  SgdState optimizer;
  int64_t step = 0;
  int epoch = 0;
  std::vector<StepRecord> log;
};

TrainState init_train_state(const TrainConfig& cfg);

double learning_rate(const TrainConfig& cfg, int64_t step, int64_t steps_per_epoch);

// One optimization step on `batch` (steps are numbered from 1 in the
// record). Branch losses are means over the batch pairs and the consistency
// term compares the two batch-mean source losses. Throws TrainingError
// naming the first non-finite component.
StepRecord train_step(TrainState& state, const DomainBatch& batch, const TrainConfig& cfg,
                      int64_t steps_per_epoch);

struct TrainData {
  Dataset source;  // labeled, with target-like fakes when needed
  Dataset target;  // unlabeled view (labeled for oracle), with fakes
  Dataset test;    // labeled target test split
};

struct EvalRecord {
  int epoch = 0;
  EvalReport report;
  LossBreakdown held_out;  // mean detection loss on the test split
};

inline constexpr const char* kEvalLogHeader = "epoch,mAP50,mAP75,mAP50_95,box,cls,obj";
std::string format_eval_record(const EvalRecord& r);

EvalRecord evaluate(const TrainConfig& cfg, const ParamSet<float>& params,
                    const Dataset& test, int epoch = 0);

struct TrainOptions {
  bool resume = false;
  // Extra keys recorded in config.snapshot (data locations, styles).
  KeyValues snapshot_extra;
  std::function<void(const std::string&)> log;
};

struct RunSummary {
  std::filesystem::path dir;
  EvalRecord final_eval;
  int64_t steps = 0;
};

// Runs the configured mode; see the run directory layout in README.md.
RunSummary train(const TrainConfig& cfg, const TrainData& data,
                 const std::filesystem::path& run_dir, const TrainOptions& options = {});

std::vector<Detection> infer(const DetectorConfig& cfg, const ParamSet<float>& params,
                             const Image& image, double conf, double iou);
std::vector<Detection> infer(const Checkpoint& checkpoint, const Image& image,
                             double conf = 0.25, double iou = 0.45);

}  // namespace ssda

#endif  // SSDA_TRAINER_H_
