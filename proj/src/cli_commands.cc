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

#include "ssda/cli_commands.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "ssda/errors.h"
#include "ssda/plot.h"

namespace fs = std::filesystem;

namespace ssda {
namespace {

bool nested(const fs::path& a, const fs::path& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (*ia != *ib) return false;
  }
  return true;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  }
  return out;
}

}  // namespace

void write_experiment_config(KeyValues& kv, const ExperimentConfig& cfg) {
  write_train_config(kv, cfg.train);
  write_synth_config(kv, cfg.synth);
  write_style_spec(kv, "s2t.", cfg.s2t);
  write_style_spec(kv, "t2s.", cfg.t2s);
  kv.set("data_dir", cfg.data_dir);
}

KeyValues default_config_kv() {
  KeyValues kv;
  write_experiment_config(kv, ExperimentConfig{});
  return kv;
}

ExperimentConfig read_experiment_config(const KeyValues& kv) {
  const KeyValues known = default_config_kv();
  for (const std::string& k : kv.keys()) {
    if (!known.has(k) && k != "config_hash") {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
  ExperimentConfig cfg;
  cfg.train = read_train_config(kv);
  cfg.synth = read_synth_config(kv);
  cfg.s2t = read_style_spec(kv, "s2t.", cfg.s2t);
  cfg.t2s = read_style_spec(kv, "t2s.", cfg.t2s);
  cfg.data_dir = kv.get("data_dir").value_or("");
  if (cfg.train.detector.num_classes != cfg.synth.num_classes() && cfg.data_dir.empty()) {
    throw ConfigError("detector.num_classes (" +
                      std::to_string(cfg.train.detector.num_classes) +
                      ") differs from the synthetic class count (" +
                      std::to_string(cfg.synth.num_classes()) + ")");
  }
  return cfg;
}

TrainData build_train_data(const ExperimentConfig& cfg) {
  Dataset source, target, test;
  if (cfg.data_dir.empty()) {
    SyntheticBenchmark bench = generate_synthetic(cfg.synth);
    source = std::move(bench.source_train);
    target = std::move(bench.target_train);
    test = std::move(bench.target_test);
  } else {
    const fs::path root = cfg.data_dir;
    source = load_dataset(root / "source_train", Domain::kSource);
    target = load_dataset(root / "target_train", Domain::kTarget);
    test = load_dataset(root / "target_test", Domain::kTarget);
  }
  TrainData data;
  const bool needs_fakes = cfg.train.uses_fake_source();
  data.source = needs_fakes ? source.with_fakes(cfg.s2t) : source;
  const bool needs_target_fakes =
      cfg.train.uses_teacher() && cfg.train.teacher_input == TeacherInput::kFakeTarget;
  Dataset tgt = needs_target_fakes ? target.with_fakes(cfg.t2s) : target;
  data.target = cfg.train.mode == TrainMode::kOracle ? tgt : tgt.without_labels();
  data.test = test;
  return data;
}

KeyValues run_snapshot(const ExperimentConfig& cfg) {
  KeyValues snap;
  write_train_config(snap, cfg.train);
  snap.set("config_hash", cfg.train.hash());
  KeyValues extra;
  write_experiment_config(extra, cfg);
  snap.merge(extra);
  return snap;
}

void claim_out_dir(const fs::path& dir, const KeyValues& snapshot, bool force) {
  const fs::path path = dir / "config.snapshot";
  if (!fs::exists(path) || force) return;
  const KeyValues existing = KeyValues::load(path.string());
  if (existing == snapshot) {
    throw ConfigError(dir.string() +
                      " already holds an identical config.snapshot; pass --force to rerun");
  }
  throw ConfigError(dir.string() +
                    " already holds a different config.snapshot; pass --force to overwrite");
}

void write_snapshot(const fs::path& dir, const KeyValues& snapshot) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.snapshot", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "config.snapshot").string());
  out << snapshot.to_text();
}

SweepSpec parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("sweep '" + text + "' must look like parameter=v1,v2,...");
  }
  SweepSpec sweep;
  sweep.parameter = trim(text.substr(0, eq));
  for (const std::string& v : split(text.substr(eq + 1), ',')) {
    if (!trim(v).empty()) sweep.values.push_back(trim(v));
  }
  if (sweep.parameter.empty() || sweep.values.empty()) {
    throw ConfigError("sweep '" + text + "' names no parameter or no values");
  }
  if (!default_config_kv().has(sweep.parameter)) {
    throw ConfigError("cannot sweep unknown parameter '" + sweep.parameter + "'");
  }
  return sweep;
}

std::vector<fs::path> ablation_dirs(const fs::path& root, const SweepSpec& sweep) {
  std::vector<fs::path> dirs;
  for (const std::string& v : sweep.values) {
    dirs.push_back(root / (sanitize(sweep.parameter) + "_" + sanitize(v)));
  }
  for (size_t i = 0; i < dirs.size(); ++i) {
    for (size_t j = i + 1; j < dirs.size(); ++j) {
      if (nested(dirs[i], dirs[j])) {
        throw ConfigError("ablation out-dirs overlap: " + dirs[i].string() + " and " +
                          dirs[j].string());
      }
    }
  }
  return dirs;
}

AblationResult run_ablate(const ExperimentConfig& base, const SweepSpec& sweep,
                          const TrainData& data, const fs::path& root, bool force,
                          const std::function<void(const std::string&)>& log) {
  const std::vector<fs::path> dirs = ablation_dirs(root, sweep);
  std::vector<ExperimentConfig> configs;
  for (size_t i = 0; i < dirs.size(); ++i) {
    KeyValues kv;
    write_experiment_config(kv, base);
    kv.set(sweep.parameter, sweep.values[i]);
    configs.push_back(read_experiment_config(kv));
    claim_out_dir(dirs[i], run_snapshot(configs.back()), force);
  }

  AblationResult result;
  for (size_t i = 0; i < dirs.size(); ++i) {
    if (log) log("ablate " + sweep.parameter + "=" + sweep.values[i]);
    TrainOptions options;
    write_experiment_config(options.snapshot_extra, configs[i]);
    options.log = log;
    const RunSummary run = train(configs[i].train, data, dirs[i], options);
    result.rows.push_back({sweep.values[i], dirs[i], run.final_eval.report});
  }

  fs::create_directories(root);
  result.table_path = root / "ablation.tsv";
  {
    std::ofstream out(result.table_path, std::ios::trunc);
    out << sweep.parameter << "\tmAP50\tmAP75\tmAP50_95\trun_dir\n";
    for (const AblationRow& r : result.rows) {
      out << r.value << "\t" << format_double(r.report.map50) << "\t"
          << format_double(r.report.map75) << "\t" << format_double(r.report.map50_95) << "\t"
          << r.run_dir.string() << "\n";
    }
  }
  PlotSpec spec;
  spec.title = "Effect of " + sweep.parameter;
  spec.x_label = sweep.parameter;
  spec.y_label = "target mAP@0.5";
  Series s;
  s.name = "mAP50";
  for (size_t i = 0; i < result.rows.size(); ++i) {
    spec.x_ticks.push_back(result.rows[i].value);
    s.x.push_back(static_cast<double>(i));
    s.y.push_back(result.rows[i].report.map50);
  }
  spec.series.push_back(std::move(s));
  result.plot_path = root / "ablation.svg";
  std::ofstream(result.plot_path, std::ios::trunc) << render_svg(spec);
  return result;
}

}  // namespace ssda
