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

#include "ssda/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "ssda/errors.h"

namespace fs = std::filesystem;

namespace ssda {
namespace {

constexpr uint64_t kSourceAugStream = 0x5001;
constexpr uint64_t kTargetAugStream = 0x7002;

struct PairAug {
  bool flip = false;
  double brightness = 0.0;
  double contrast = 1.0;
};

PairAug draw_aug(std::mt19937_64& rng, const AugmentPolicy& policy) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PairAug a;
  a.flip = u(rng) < policy.flip_prob;
  a.brightness = (2.0 * u(rng) - 1.0) * policy.brightness;
  a.contrast = 1.0 + (2.0 * u(rng) - 1.0) * policy.contrast;
  return a;
}

Image apply_aug(const Image& image, const PairAug& a) {
  Image out = a.flip ? hflip(image) : image;
  if (a.brightness != 0.0 || a.contrast != 1.0) {
    out = brightness_contrast(out, a.brightness, a.contrast);
  }
  return out;
}

void add_scaled(LossBreakdown& acc, const LossBreakdown& v, double s) {
  acc.box += s * v.box;
  acc.cls += s * v.cls;
  acc.obj += s * v.obj;
}

void check_finite(const LossBreakdown& lb, const std::string& branch) {
  if (!std::isfinite(lb.box)) throw TrainingError("non-finite loss in " + branch + ".box");
  if (!std::isfinite(lb.cls)) throw TrainingError("non-finite loss in " + branch + ".cls");
  if (!std::isfinite(lb.obj)) throw TrainingError("non-finite loss in " + branch + ".obj");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(),
                                                suffix) == 0;
}

std::string checkpoint_name(const std::string& role, int epoch) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.ckpt", role.c_str(), epoch);
  return buf;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> lines;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Keeps the header plus rows whose leading integer is <= limit.
void truncate_log(const fs::path& path, const std::string& header, int64_t limit) {
  const auto lines = read_lines(path);
  std::ofstream out(path, std::ios::trunc);
  out << header << "\n";
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto comma = lines[i].find(',');
    if (comma == std::string::npos) continue;
    if (std::stoll(lines[i].substr(0, comma)) <= limit) out << lines[i] << "\n";
  }
}

std::vector<LabeledBox> letterboxed_labels(const Dataset& ds, size_t i, int size,
                                           Letterbox* geometry = nullptr) {
  const Image& img = ds.image(i);
  const Letterbox lb = letterbox_geometry(img.width, img.height, size);
  if (geometry) *geometry = lb;
  std::vector<LabeledBox> out;
  for (const LabeledBox& l : ds.labels(i)) {
    out.push_back({clip(lb.apply(l.box), size, size), l.class_id});
  }
  return out;
}

}  // namespace

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kSourceOnly:
      return "source_only";
    case TrainMode::kBase:
      return "base";
    case TrainMode::kBaseD:
      return "base_D";
    case TrainMode::kBaseC:
      return "base_C";
    case TrainMode::kBaseDC:
      return "base_DC";
    case TrainMode::kOracle:
      return "oracle";
  }
  return "base_DC";
}

TrainMode parse_train_mode(const std::string& text) {
  for (TrainMode m : {TrainMode::kSourceOnly, TrainMode::kBase, TrainMode::kBaseD,
                      TrainMode::kBaseC, TrainMode::kBaseDC, TrainMode::kOracle}) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError("unknown mode '" + text +
                    "' (source_only|base|base_D|base_C|base_DC|oracle)");
}

std::string to_string(TeacherInput input) {
  return input == TeacherInput::kRawTarget ? "raw_target" : "fake_target";
}

TeacherInput parse_teacher_input(const std::string& text) {
  if (text == "raw_target") return TeacherInput::kRawTarget;
  if (text == "fake_target") return TeacherInput::kFakeTarget;
  throw ConfigError("unknown teacher_input '" + text + "' (raw_target|fake_target)");
}

void TrainConfig::validate() const {
  detector.validate();
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_pairs < 1) throw ConfigError("batch_pairs must be >= 1");
  if (!(lr0 > 0.0)) throw ConfigError("lr0 must be positive");
  if (!(lrf > 0.0 && lrf <= 1.0)) throw ConfigError("lrf must be in (0, 1]");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (warmup_epochs < 0.0) throw ConfigError("warmup_epochs must be >= 0");
  if (loss.alpha < 0.0 || loss.beta < 0.0) throw ConfigError("alpha and beta must be >= 0");
  if (!(loss.lambda_box > 0.0 && loss.lambda_cls > 0.0 && loss.lambda_obj > 0.0)) {
    throw ConfigError("lambda_box, lambda_cls and lambda_obj must be positive");
  }
  if (loss.focal_gamma < 0.0) throw ConfigError("focal_gamma must be >= 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in (0, 1)");
  if (!(tau_box >= 0.0 && tau_box <= 1.0)) throw ConfigError("tau_box must be in [0, 1]");
  if (!(tau_cls >= 0.0 && tau_cls <= 1.0)) throw ConfigError("tau_cls must be in [0, 1]");
  if (ema_start_step < 0) throw ConfigError("ema_start_step must be >= 0");
  if (!(augment.flip_prob >= 0.0 && augment.flip_prob <= 1.0)) {
    throw ConfigError("flip_prob must be in [0, 1]");
  }
  if (augment.brightness < 0.0 || augment.contrast < 0.0 || augment.contrast >= 1.0) {
    throw ConfigError("brightness must be >= 0 and contrast in [0, 1)");
  }
  if (eval_every < 0 || checkpoint_every < 0) {
    throw ConfigError("eval_every and checkpoint_every must be >= 0");
  }
}

double TrainConfig::effective_alpha() const {
  return mode == TrainMode::kBaseD || mode == TrainMode::kBaseDC ? loss.alpha : 0.0;
}

double TrainConfig::effective_beta() const {
  return mode == TrainMode::kBaseC || mode == TrainMode::kBaseDC ? loss.beta : 0.0;
}

bool TrainConfig::uses_teacher() const { return effective_alpha() > 0.0; }

bool TrainConfig::uses_fake_source() const {
  return mode != TrainMode::kSourceOnly && mode != TrainMode::kOracle;
}

std::string TrainConfig::hash() const {
  KeyValues kv;
  write_train_config(kv, *this);
  return hex64(fnv1a64(kv.to_text()));
}

void write_train_config(KeyValues& kv, const TrainConfig& cfg) {
  kv.set("mode", to_string(cfg.mode));
  kv.set("epochs", std::to_string(cfg.epochs));
  kv.set("batch_pairs", std::to_string(cfg.batch_pairs));
  kv.set("lr0", format_double(cfg.lr0));
  kv.set("lrf", format_double(cfg.lrf));
  kv.set("momentum", format_double(cfg.momentum));
  kv.set("weight_decay", format_double(cfg.weight_decay));
  kv.set("warmup_epochs", format_double(cfg.warmup_epochs));
  kv.set("grad_clip", format_double(cfg.grad_clip));
  kv.set("alpha", format_double(cfg.loss.alpha));
  kv.set("beta", format_double(cfg.loss.beta));
  kv.set("con_norm", to_string(cfg.loss.con_norm));
  kv.set("lambda_box", format_double(cfg.loss.lambda_box));
  kv.set("lambda_cls", format_double(cfg.loss.lambda_cls));
  kv.set("lambda_obj", format_double(cfg.loss.lambda_obj));
  kv.set("focal_gamma", format_double(cfg.loss.focal_gamma));
  kv.set("gamma", format_double(cfg.gamma));
  kv.set("tau_box", format_double(cfg.tau_box));
  kv.set("tau_cls", format_double(cfg.tau_cls));
  kv.set("ema_start_step", std::to_string(cfg.ema_start_step));
  kv.set("seed", std::to_string(cfg.seed));
  kv.set("teacher_input", to_string(cfg.teacher_input));
  kv.set("flip_prob", format_double(cfg.augment.flip_prob));
  kv.set("brightness", format_double(cfg.augment.brightness));
  kv.set("contrast", format_double(cfg.augment.contrast));
  kv.set("eval_every", std::to_string(cfg.eval_every));
  kv.set("checkpoint_every", std::to_string(cfg.checkpoint_every));
  kv.set("eval_conf", format_double(cfg.eval_conf));
  kv.set("eval_iou", format_double(cfg.eval_iou));
  kv.set("infer_conf", format_double(cfg.infer_conf));
  kv.set("infer_iou", format_double(cfg.infer_iou));
  const KeyValues det = KeyValues::parse(serialize_detector_config(cfg.detector));
  for (const std::string& k : det.keys()) kv.set("detector." + k, *det.get(k));
}

TrainConfig read_train_config(const KeyValues& kv, TrainConfig cfg) {
  auto d = [&](const char* key, double& field) {
    if (auto v = kv.get(key)) field = parse_double(key, *v);
  };
  auto i = [&](const char* key, int& field) {
    if (auto v = kv.get(key)) field = parse_int(key, *v);
  };
  if (auto v = kv.get("mode")) cfg.mode = parse_train_mode(*v);
  i("epochs", cfg.epochs);
  i("batch_pairs", cfg.batch_pairs);
  d("lr0", cfg.lr0);
  d("lrf", cfg.lrf);
  d("momentum", cfg.momentum);
  d("weight_decay", cfg.weight_decay);
  d("warmup_epochs", cfg.warmup_epochs);
  d("grad_clip", cfg.grad_clip);
  d("alpha", cfg.loss.alpha);
  d("beta", cfg.loss.beta);
  if (auto v = kv.get("con_norm")) cfg.loss.con_norm = parse_consistency_norm(*v);
  d("lambda_box", cfg.loss.lambda_box);
  d("lambda_cls", cfg.loss.lambda_cls);
  d("lambda_obj", cfg.loss.lambda_obj);
  d("focal_gamma", cfg.loss.focal_gamma);
  d("gamma", cfg.gamma);
  d("tau_box", cfg.tau_box);
  d("tau_cls", cfg.tau_cls);
  if (auto v = kv.get("ema_start_step")) cfg.ema_start_step = parse_int("ema_start_step", *v);
  if (auto v = kv.get("seed")) {
    try {
      cfg.seed = std::stoull(*v);
    } catch (const std::exception&) {
      throw ConfigError("seed '" + *v + "' is not an unsigned integer");
    }
  }
  if (auto v = kv.get("teacher_input")) cfg.teacher_input = parse_teacher_input(*v);
  d("flip_prob", cfg.augment.flip_prob);
  d("brightness", cfg.augment.brightness);
  d("contrast", cfg.augment.contrast);
  i("eval_every", cfg.eval_every);
  i("checkpoint_every", cfg.checkpoint_every);
  d("eval_conf", cfg.eval_conf);
  d("eval_iou", cfg.eval_iou);
  d("infer_conf", cfg.infer_conf);
  d("infer_iou", cfg.infer_iou);

  KeyValues det = KeyValues::parse(serialize_detector_config(cfg.detector));
  bool touched = false;
  for (const std::string& k : kv.keys()) {
    if (k.rfind("detector.", 0) == 0) {
      det.set(k.substr(9), *kv.get(k));
      touched = true;
    }
  }
  if (touched) cfg.detector = parse_detector_config(det.to_text());
  cfg.validate();
  return cfg;
}

std::string format_step_record(const StepRecord& r) {
  return std::to_string(r.step) + "," + format_double(r.src.box) + "," +
         format_double(r.src.cls) + "," + format_double(r.src.obj) + "," +
         format_double(r.dis) + "," + format_double(r.con) + "," + format_double(r.total);
}

std::string format_eval_record(const EvalRecord& r) {
  return std::to_string(r.epoch) + "," + format_double(r.report.map50) + "," +
         format_double(r.report.map75) + "," + format_double(r.report.map50_95) + "," +
         format_double(r.held_out.box) + "," + format_double(r.held_out.cls) + "," +
         format_double(r.held_out.obj);
}

TrainState init_train_state(const TrainConfig& cfg) {
  TrainState state;
  state.student = init_params<float>(cfg.detector, cfg.seed);
  state.teacher = TeacherState(state.student, cfg.gamma);
  state.optimizer.velocity = state.student.zeros_like();
  return state;
}

double learning_rate(const TrainConfig& cfg, int64_t step, int64_t steps_per_epoch) {
  const double total = static_cast<double>(cfg.epochs) * steps_per_epoch;
  const double progress = std::clamp(step / total, 0.0, 1.0);
  double lr = cfg.lr0 * (cfg.lrf + (1.0 - cfg.lrf) * 0.5 *
                                       (1.0 + std::cos(std::numbers::pi * progress)));
  const double warmup = cfg.warmup_epochs * steps_per_epoch;
  if (step < warmup) lr *= (step + 1.0) / warmup;
  return lr;
}

StepRecord train_step(TrainState& state, const DomainBatch& batch, const TrainConfig& cfg,
                      int64_t steps_per_epoch) {
  const DetectorConfig& dc = cfg.detector;
  const size_t pairs = batch.source.size();
  if (pairs == 0) throw ConfigError("empty batch");
  const double inv_b = 1.0 / static_cast<double>(pairs);
  const double alpha = cfg.effective_alpha();
  const double beta = cfg.effective_beta();
  LossWeights weights = cfg.loss;
  weights.alpha = alpha;
  weights.beta = beta;

  ParamSet<float> grads = state.student.zeros_like();
  StepRecord rec;
  rec.step = state.step + 1;

  std::mt19937_64 src_rng(mix_seed(mix_seed(cfg.seed, kSourceAugStream), state.step));
  std::mt19937_64 tgt_rng(mix_seed(mix_seed(cfg.seed, kTargetAugStream), state.step));

  // Supervised branches first: the consistency term compares the batch
  // losses of the two source branches, so its weights are only known once
  // every pair has been seen.
  struct SourcePair {
    TargetMap targets;
    ForwardCache<float> cache_src, cache_fake;
    PredictionMap<float> pred_src, pred_fake;
  };
  std::vector<SourcePair> src_pairs(pairs);
  LossBreakdown det_src, det_fake;
  for (size_t j = 0; j < pairs; ++j) {
    SourcePair& sp = src_pairs[j];
    const PairAug aug = draw_aug(src_rng, cfg.augment);
    const std::vector<LabeledBox> labels =
        aug.flip ? hflip(batch.source_labels[j], dc.image_size) : batch.source_labels[j];
    sp.targets = assign_targets(labels, dc);
    sp.pred_src = forward(dc, state.student, apply_aug(batch.source[j], aug), &sp.cache_src);
    const LossBreakdown l_src = detection_loss(sp.pred_src, sp.targets, dc, weights);
    check_finite(l_src, "det_src");
    add_scaled(det_src, l_src, inv_b);
    if (cfg.uses_fake_source()) {
      if (batch.source_fake[j].empty()) {
        throw ConfigError("mode " + to_string(cfg.mode) + " needs target-like fake sources");
      }
      sp.pred_fake =
          forward(dc, state.student, apply_aug(batch.source_fake[j], aug), &sp.cache_fake);
      const LossBreakdown l_fake = detection_loss(sp.pred_fake, sp.targets, dc, weights);
      check_finite(l_fake, "det_fake_src");
      add_scaled(det_fake, l_fake, inv_b);
    }
  }

  double con = 0.0;
  ComponentScale up_src{inv_b, inv_b, inv_b};
  ComponentScale up_fake{inv_b, inv_b, inv_b};
  if (beta > 0.0) {
    con = consistency_loss(det_src, det_fake, weights.con_norm);
    if (!std::isfinite(con)) throw TrainingError("non-finite loss in con");
    const auto [ga, gb] = consistency_grad(det_src, det_fake, weights.con_norm);
    up_src.box += beta * inv_b * ga.box;
    up_src.cls += beta * inv_b * ga.cls;
    up_src.obj += beta * inv_b * ga.obj;
    up_fake.box += beta * inv_b * gb.box;
    up_fake.cls += beta * inv_b * gb.cls;
    up_fake.obj += beta * inv_b * gb.obj;
  }
  for (SourcePair& sp : src_pairs) {
    {
      auto g = PredictionMap<float>::zeros(dc);
      detection_loss(sp.pred_src, sp.targets, dc, weights, &g, up_src);
      backward(dc, state.student, sp.cache_src, g, grads);
    }
    if (cfg.uses_fake_source()) {
      auto g = PredictionMap<float>::zeros(dc);
      detection_loss(sp.pred_fake, sp.targets, dc, weights, &g, up_fake);
      backward(dc, state.student, sp.cache_fake, g, grads);
    }
    sp = SourcePair{};
  }

  LossBreakdown dis;
  if (alpha > 0.0) {
    for (size_t j = 0; j < pairs; ++j) {
      const Image& teacher_in =
          cfg.teacher_input == TeacherInput::kFakeTarget ? batch.target_fake[j] : batch.target[j];
      if (teacher_in.empty()) {
        throw ConfigError("teacher_input fake_target needs source-like fake targets");
      }
      PseudoLabelSet pseudo =
          generate_pseudo_labels(state.teacher, teacher_in, cfg.tau_box, cfg.tau_cls, dc);
      pseudo.source_step = state.step;
      const PairAug taug = draw_aug(tgt_rng, cfg.augment);
      if (taug.flip) {
        for (Detection& d : pseudo.labels) {
          const double x1 = dc.image_size - d.box.x2;
          d.box.x2 = dc.image_size - d.box.x1;
          d.box.x1 = x1;
        }
      }
      rec.pseudo_labels += static_cast<int>(pseudo.labels.size());
      ForwardCache<float> cache_tgt;
      const PredictionMap<float> pred_tgt =
          forward(dc, state.student, apply_aug(batch.target[j], taug), &cache_tgt);
      auto g = PredictionMap<float>::zeros(dc);
      const LossBreakdown l_dis =
          distillation_body(pred_tgt, pseudo, dc, weights, &g,
                            ComponentScale{alpha * inv_b, alpha * inv_b, alpha * inv_b});
      check_finite(l_dis, "dis");
      add_scaled(dis, l_dis, inv_b);
      backward(dc, state.student, cache_tgt, g, grads);
    }
  }

  rec.src = det_src;
  rec.fake_src = det_fake;
  rec.dis = dis.det_total();
  rec.con = con;
  rec.total = total_loss(det_src, det_fake, dis, con, weights);
  if (!std::isfinite(rec.total)) throw TrainingError("non-finite loss in total");

  if (cfg.grad_clip > 0.0) {
    double sq = 0.0;
    for (const auto& t : grads) {
      for (float v : t.values) sq += static_cast<double>(v) * v;
    }
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) throw TrainingError("non-finite gradient");
    if (norm > cfg.grad_clip) {
      const float s = static_cast<float>(cfg.grad_clip / norm);
      for (auto& t : grads) {
        for (float& v : t.values) v *= s;
      }
    }
  }

  const float lr = static_cast<float>(learning_rate(cfg, state.step, steps_per_epoch));
  const float mu = static_cast<float>(cfg.momentum);
  const float wd = static_cast<float>(cfg.weight_decay);
  for (size_t i = 0; i < state.student.size(); ++i) {
    auto& p = state.student[i].values;
    auto& v = state.optimizer.velocity[i].values;
    const auto& g = grads[i].values;
    const bool decay = ends_with(state.student[i].spec.name, ".weight");
    for (size_t k = 0; k < p.size(); ++k) {
      const float gk = decay ? g[k] + wd * p[k] : g[k];
      v[k] = mu * v[k] + gk;
      p[k] -= lr * (gk + mu * v[k]);
    }
  }
  state.student.bump_version();
  if (!state.student.all_finite()) throw TrainingError("student parameters became non-finite");

  if (state.step >= cfg.ema_start_step) {
    state.teacher.update(state.student);
  } else {
    state.teacher = TeacherState(state.student, cfg.gamma);
  }
  ++state.step;
  state.log.push_back(rec);
  return rec;
}

EvalRecord evaluate(const TrainConfig& cfg, const ParamSet<float>& params, const Dataset& test,
                    int epoch) {
  const DetectorConfig& dc = cfg.detector;
  DetectionsById dets;
  GroundTruthById gts;
  EvalRecord rec;
  rec.epoch = epoch;
  for (size_t i = 0; i < test.size(); ++i) {
    const Image img = letterbox(test.image(i), dc.image_size);
    std::vector<LabeledBox> labels = letterboxed_labels(test, i, dc.image_size);
    const PredictionMap<float> pred = forward(dc, params, img);
    dets[test.id(i)] = nms(decode(pred, dc, cfg.eval_conf), cfg.eval_iou);
    const LossBreakdown lb = detection_loss(pred, assign_targets(labels, dc), dc, cfg.loss);
    add_scaled(rec.held_out, lb, 1.0 / static_cast<double>(test.size()));
    gts[test.id(i)] = std::move(labels);
  }
  rec.report = map_report(dets, gts);
  return rec;
}

RunSummary train(const TrainConfig& cfg, const TrainData& data, const fs::path& run_dir,
                 const TrainOptions& options) {
  cfg.validate();
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };
  const bool oracle = cfg.mode == TrainMode::kOracle;
  if (oracle && data.target.labels_hidden()) {
    throw ConfigError("oracle mode needs a labeled target training set");
  }
  const Dataset train_src = oracle ? data.target : data.source;
  const Dataset train_tgt = oracle ? data.target : data.target.without_labels();
  if (cfg.uses_fake_source() && !train_src.has_fakes()) {
    throw ConfigError("mode " + to_string(cfg.mode) + " needs target-like fake sources");
  }
  if (cfg.uses_teacher() && cfg.teacher_input == TeacherInput::kFakeTarget &&
      !train_tgt.has_fakes()) {
    throw ConfigError("teacher_input fake_target needs source-like fake targets");
  }

  fs::create_directories(run_dir / "checkpoints");
  const std::string config_hash = cfg.hash();
  const fs::path snapshot_path = run_dir / "config.snapshot";
  const fs::path loss_path = run_dir / "losses.csv";
  const fs::path eval_path = run_dir / "eval.csv";

  TrainState state = init_train_state(cfg);
  if (options.resume) {
    if (!fs::exists(snapshot_path)) {
      throw ConfigError("cannot resume: " + snapshot_path.string() + " does not exist");
    }
    const KeyValues previous = KeyValues::load(snapshot_path.string());
    const std::string previous_hash = previous.get("config_hash").value_or("");
    if (previous_hash != config_hash) {
      throw ConfigError("cannot resume: config hash " + config_hash +
                        " differs from the run's " + previous_hash);
    }
    int latest = -1;
    for (const auto& e : fs::directory_iterator(run_dir / "checkpoints")) {
      const std::string name = e.path().filename().string();
      int epoch = 0;
      if (std::sscanf(name.c_str(), "student_%d.ckpt", &epoch) == 1 &&
          name == checkpoint_name("student", epoch)) {
        latest = std::max(latest, epoch);
      }
    }
    if (latest >= 0) {
      const fs::path dir = run_dir / "checkpoints";
      const Checkpoint s = load_checkpoint((dir / checkpoint_name("student", latest)).string(),
                                           cfg.detector);
      if (s.metadata.at("config_hash") != config_hash) {
        throw ConfigError("cannot resume: checkpoint config hash " +
                          s.metadata.at("config_hash") + " differs from " + config_hash);
      }
      const Checkpoint t = load_checkpoint((dir / checkpoint_name("teacher", latest)).string(),
                                           cfg.detector);
      const Checkpoint o =
          load_checkpoint((dir / checkpoint_name("optimizer", latest)).string(), cfg.detector);
      state.student = s.params;
      state.step = std::stoll(s.metadata.at("step"));
      state.epoch = latest;
      state.teacher = TeacherState(state.student, cfg.gamma);
      const int64_t teacher_steps = std::stoll(t.metadata.at("teacher_steps"));
      if (t.precise) {
        state.teacher.load(*t.precise, teacher_steps);
      } else {
        state.teacher.load(t.params, teacher_steps);
      }
      state.optimizer.velocity = o.params;
      truncate_log(loss_path, kLossLogHeader, state.step);
      truncate_log(eval_path, kEvalLogHeader, latest);
      log("resumed " + run_dir.string() + " at epoch " + std::to_string(latest));
    }
  }

  KeyValues snapshot;
  write_train_config(snapshot, cfg);
  snapshot.set("config_hash", config_hash);
  snapshot.merge(options.snapshot_extra);
  {
    std::ofstream out(snapshot_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + snapshot_path.string());
    out << snapshot.to_text();
  }
  if (state.step == 0) {
    std::ofstream(loss_path, std::ios::trunc) << kLossLogHeader << "\n";
    std::ofstream(eval_path, std::ios::trunc) << kEvalLogHeader << "\n";
  }

  auto save_all = [&](const std::string& suffix_student, const std::string& suffix_teacher,
                      const std::string& suffix_opt) {
    std::map<std::string, std::string> meta{{"config_hash", config_hash},
                                            {"epoch", std::to_string(state.epoch)},
                                            {"step", std::to_string(state.step)},
                                            {"mode", to_string(cfg.mode)}};
    const fs::path dir = run_dir / "checkpoints";
    meta["role"] = "student";
    save_checkpoint((dir / suffix_student).string(), cfg.detector, state.student, meta);
    meta["role"] = "teacher";
    meta["teacher_steps"] = std::to_string(state.teacher.step_count());
    save_checkpoint((dir / suffix_teacher).string(), cfg.detector, state.teacher.shadow(),
                    meta);
    if (!suffix_opt.empty()) {
      meta["role"] = "optimizer";
      save_checkpoint((dir / suffix_opt).string(), cfg.detector, state.optimizer.velocity,
                      meta);
    }
  };

  RunSummary summary;
  summary.dir = run_dir;
  std::ofstream loss_out(loss_path, std::ios::app);
  std::ofstream eval_out(eval_path, std::ios::app);
  for (int epoch = state.epoch; epoch < cfg.epochs; ++epoch) {
    BatchStream stream(train_src, train_tgt, cfg.batch_pairs, cfg.seed,
                       epoch, cfg.detector.image_size, 0.5f, true);
    const int64_t steps_per_epoch = static_cast<int64_t>(stream.num_batches());
    DomainBatch batch;
    LossBreakdown mean_src;
    double mean_total = 0.0;
    while (stream.next(batch)) {
      const StepRecord rec = train_step(state, batch, cfg, steps_per_epoch);
      loss_out << format_step_record(rec) << "\n";
      add_scaled(mean_src, rec.src, 1.0 / steps_per_epoch);
      mean_total += rec.total / steps_per_epoch;
    }
    loss_out.flush();
    state.epoch = epoch + 1;

    const bool last = state.epoch == cfg.epochs;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "epoch %d/%d  step %lld  box %.4f  cls %.4f  obj %.4f  total %.4f",
                  state.epoch, cfg.epochs, static_cast<long long>(state.step), mean_src.box,
                  mean_src.cls, mean_src.obj, mean_total);
    std::string line = buf;
    if ((cfg.eval_every > 0 && state.epoch % cfg.eval_every == 0) || last) {
      summary.final_eval = evaluate(cfg, state.student, data.test, state.epoch);
      eval_out << format_eval_record(summary.final_eval) << "\n";
      eval_out.flush();
      std::snprintf(buf, sizeof(buf), "  mAP50 %.2f", summary.final_eval.report.map50);
      line += buf;
    }
    log(line);
    if (cfg.checkpoint_every > 0 && state.epoch % cfg.checkpoint_every == 0) {
      save_all(checkpoint_name("student", state.epoch), checkpoint_name("teacher", state.epoch),
               checkpoint_name("optimizer", state.epoch));
    }
  }
  save_all("student_final.ckpt", "teacher_final.ckpt", "");
  summary.steps = state.step;
  return summary;
}

std::vector<Detection> infer(const DetectorConfig& cfg, const ParamSet<float>& params,
                             const Image& image, double conf, double iou) {
  Letterbox lb;
  const Image input = letterbox(image, cfg.image_size, 0.5f, &lb);
  std::vector<Detection> dets = decode(forward(cfg, params, input), cfg, conf);
  for (Detection& d : dets) {
    d.box = clip({(d.box.x1 - lb.pad_x) / lb.scale, (d.box.y1 - lb.pad_y) / lb.scale,
                  (d.box.x2 - lb.pad_x) / lb.scale, (d.box.y2 - lb.pad_y) / lb.scale},
                 image.width, image.height);
  }
  // Suppression runs in image coordinates so the reported boxes obey it.
  return nms(dets, iou);
}

std::vector<Detection> infer(const Checkpoint& checkpoint, const Image& image, double conf,
                             double iou) {
  return infer(checkpoint.config, checkpoint.params, image, conf, iou);
}

}  // namespace ssda
