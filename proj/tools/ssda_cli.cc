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

// Command-line entry point: gen-data, stylize, train, eval, ablate, plot.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssda/checkpoint.h"
#include "ssda/cli_commands.h"
#include "ssda/domain_data.h"
#include "ssda/errors.h"
#include "ssda/eval_metrics.h"
#include "ssda/plot.h"
#include "ssda/style_transfer.h"
#include "ssda/trainer.h"

namespace fs = std::filesystem;
using namespace ssda;

namespace {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

struct Globals {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out_dir;
  std::string log_level = "info";
  bool force = false;
  std::map<std::string, std::string> overrides;

  Level level() const {
    if (log_level == "error") return Level::kError;
    if (log_level == "warn") return Level::kWarn;
    if (log_level == "debug") return Level::kDebug;
    return Level::kInfo;
  }
  void log(Level l, const std::string& msg) const {
    static const char* kNames[] = {"error", "warn", "info", "debug"};
    if (l <= level()) std::cerr << "[" << kNames[static_cast<int>(l)] << "] " << msg << "\n";
  }
};

std::string kebab(const std::string& key) {
  std::string out = key;
  for (char& c : out) {
    if (c == '_' || c == '.') c = '-';
  }
  return out;
}

// Registers one --kebab-case flag per configuration key.
void add_config_flags(CLI::App* sub, Globals& g) {
  const KeyValues defaults = default_config_kv();
  for (const std::string& key : defaults.keys()) {
    if (key == "seed") continue;
    sub->add_option_function<std::string>(
        "--" + kebab(key), [&g, key](const std::string& v) { g.overrides[key] = v; },
        "config key " + key + " (default: " + defaults.get(key).value_or("") + ")");
  }
}

ExperimentConfig resolve_config(const Globals& g) {
  KeyValues kv;
  if (!g.config_path.empty()) kv = KeyValues::load(g.config_path);
  for (const auto& [k, v] : g.overrides) kv.set(k, v);
  if (g.seed) kv.set("seed", std::to_string(*g.seed));
  return read_experiment_config(kv);
}

fs::path resolve_out_dir(const Globals& g, const std::string& command) {
  if (!g.out_dir.empty()) return g.out_dir;
  const char* env = std::getenv("SSDA_OUT_DIR");
  const fs::path root = env && *env ? fs::path(env) : fs::path("runs");
  return root / command;
}

KeyValues command_snapshot(const std::string& command, const ExperimentConfig& cfg,
                           const KeyValues& extra = {}) {
  KeyValues kv;
  kv.set("command", command);
  write_experiment_config(kv, cfg);
  kv.merge(extra);
  return kv;
}

Dataset load_test_split(const ExperimentConfig& cfg, const std::string& test_dir) {
  if (!test_dir.empty()) return load_dataset(test_dir, Domain::kTarget);
  if (!cfg.data_dir.empty()) {
    return load_dataset(fs::path(cfg.data_dir) / "target_test", Domain::kTarget);
  }
  SynthConfig synth = cfg.synth;
  synth.train_src = 0;
  synth.train_tgt = 0;
  return generate_synthetic(synth).target_test;
}

int cmd_gen_data(const Globals& g) {
  const ExperimentConfig cfg = resolve_config(g);
  const fs::path out = resolve_out_dir(g, "gen-data");
  const KeyValues snap = command_snapshot("gen-data", cfg);
  claim_out_dir(out, snap, g.force);
  g.log(Level::kInfo, "rendering synthetic benchmark into " + out.string());
  const SyntheticBenchmark bench = generate_synthetic(cfg.synth);
  write_dataset(out / "source_train", bench.source_train);
  write_dataset(out / "target_train", bench.target_train);
  write_dataset(out / "target_test", bench.target_test);
  write_snapshot(out, snap);
  std::cout << "source_train " << bench.source_train.size() << "\ntarget_train "
            << bench.target_train.size() << "\ntarget_test " << bench.target_test.size()
            << "\n";
  return 0;
}

int cmd_stylize(const Globals& g, const std::string& input, const std::string& direction) {
  const ExperimentConfig cfg = resolve_config(g);
  if (direction != "s2t" && direction != "t2s") {
    throw ConfigError("--direction must be s2t or t2s");
  }
  const StyleSpec& spec = direction == "s2t" ? cfg.s2t : cfg.t2s;
  const fs::path out = resolve_out_dir(g, "stylize");
  KeyValues extra;
  extra.set("input", input);
  extra.set("direction", direction);
  const KeyValues snap = command_snapshot("stylize", cfg, extra);
  claim_out_dir(out, snap, g.force);
  const size_t n = stylize_directory(input, out, spec);
  write_snapshot(out, snap);
  std::cout << "stylized " << n << " images (" << direction << ", spec " << spec.hash()
            << ")\n";
  return 0;
}

int cmd_train(const Globals& g, bool resume) {
  const ExperimentConfig cfg = resolve_config(g);
  const fs::path out = resolve_out_dir(g, "train");
  if (!resume) claim_out_dir(out, run_snapshot(cfg), g.force);
  g.log(Level::kInfo, "mode " + to_string(cfg.train.mode) + ", " +
                          std::to_string(parameter_count(cfg.train.detector)) + " parameters");
  const TrainData data = build_train_data(cfg);
  TrainOptions options;
  options.resume = resume;
  write_experiment_config(options.snapshot_extra, cfg);
  options.log = [&g](const std::string& m) { g.log(Level::kInfo, m); };
  const RunSummary run = train(cfg.train, data, out, options);
  std::cout << format_report_table(run.final_eval.report, to_string(cfg.train.mode));
  return 0;
}

int cmd_eval(const Globals& g, const std::string& checkpoint, const std::string& detections,
             const std::string& test_dir, std::optional<double> source_only_map,
             std::optional<double> oracle_map) {
  const ExperimentConfig cfg = resolve_config(g);
  if (checkpoint.empty() == detections.empty()) {
    throw ConfigError("eval needs exactly one of --checkpoint or --detections");
  }
  const fs::path out = resolve_out_dir(g, "eval");
  KeyValues extra;
  extra.set("checkpoint", checkpoint);
  extra.set("detections", detections);
  extra.set("test_dir", test_dir);
  const KeyValues snap = command_snapshot("eval", cfg, extra);
  claim_out_dir(out, snap, g.force);
  const Dataset test = load_test_split(cfg, test_dir);

  EvalReport report;
  std::string method;
  if (!checkpoint.empty()) {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    TrainConfig tc = cfg.train;
    tc.detector = ckpt.config;
    report = evaluate(tc, ckpt.params, test).report;
    method = fs::path(checkpoint).stem().string();
  } else {
    DetectionsById dets;
    GroundTruthById gts;
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < test.size(); ++i) {
      gts[test.id(i)] = test.labels(i);
      index[test.id(i)] = i;
    }
    for (const auto& e : fs::directory_iterator(detections)) {
      if (e.path().extension() != ".txt") continue;
      const std::string id = e.path().stem().string();
      auto it = index.find(id);
      if (it == index.end()) {
        throw ConfigError("detection file " + e.path().string() +
                          " references unknown image id '" + id + "'");
      }
      std::ifstream in(e.path());
      std::stringstream ss;
      ss << in.rdbuf();
      const Image& img = test.image(it->second);
      dets[id] = parse_detections(ss.str(), img.width, img.height, e.path().string());
    }
    report = map_report(dets, gts);
    method = fs::path(detections).filename().string();
  }
  attach_gain_rel(report, source_only_map, oracle_map);
  fs::create_directories(out);
  const std::string table = format_report_table(report, method);
  std::ofstream(out / "report.txt", std::ios::trunc) << table;
  std::ofstream(out / "report.kv", std::ios::trunc) << report_to_kv(report).to_text();
  write_snapshot(out, snap);
  std::cout << table;
  return 0;
}

int cmd_ablate(const Globals& g, const std::string& sweep_text) {
  const ExperimentConfig cfg = resolve_config(g);
  const SweepSpec sweep = parse_sweep(sweep_text);
  const fs::path out = resolve_out_dir(g, "ablate");
  KeyValues extra;
  extra.set("sweep", sweep_text);
  const KeyValues snap = command_snapshot("ablate", cfg, extra);
  claim_out_dir(out, snap, g.force);
  ablation_dirs(out, sweep);  // overlap check before any data work
  // Data are built for the most demanding grid point so every mode finds
  // the fakes it needs.
  ExperimentConfig data_cfg = cfg;
  data_cfg.train.mode = cfg.train.mode == TrainMode::kOracle ? TrainMode::kOracle
                                                             : TrainMode::kBaseDC;
  if (data_cfg.train.loss.alpha <= 0.0) data_cfg.train.loss.alpha = 1.0;
  const TrainData data = build_train_data(data_cfg);
  write_snapshot(out, snap);
  const AblationResult result = run_ablate(
      cfg, sweep, data, out, g.force, [&g](const std::string& m) { g.log(Level::kInfo, m); });
  std::ifstream table(result.table_path);
  std::cout << table.rdbuf();
  return 0;
}

int cmd_plot(const Globals& g, const std::vector<std::string>& runs) {
  const fs::path out = resolve_out_dir(g, "plot");
  KeyValues snap;
  snap.set("command", "plot");
  std::string joined;
  for (const std::string& r : runs) joined += (joined.empty() ? "" : ",") + r;
  snap.set("runs", joined);
  claim_out_dir(out, snap, g.force);
  std::vector<fs::path> paths(runs.begin(), runs.end());
  const auto written = run_plot(paths, out);
  write_snapshot(out, snap);
  for (const fs::path& p : written) std::cout << p.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-teacher domain-adaptive detection at desk scale", "ssda"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "flat key = value config file");
  app.add_option("--seed", g.seed, "training seed");
  app.add_option("--out-dir", g.out_dir, "output directory (default $SSDA_OUT_DIR/<command>)");
  app.add_option("--log-level", g.log_level, "error|warn|info|debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  app.add_flag("--force", g.force, "overwrite an out-dir that already holds a run");

  auto* gen = app.add_subcommand("gen-data", "render the synthetic two-domain benchmark");
  add_config_flags(gen, g);

  std::string input, direction = "s2t";
  auto* sty = app.add_subcommand("stylize", "write stylized fakes for a directory of images");
  sty->add_option("--input", input, "directory of real images")->required();
  sty->add_option("--direction", direction, "s2t (target-like) or t2s (source-like)");
  add_config_flags(sty, g);

  bool resume = false;
  auto* tr = app.add_subcommand("train", "train one run");
  tr->add_flag("--resume", resume, "continue from the latest checkpoint in --out-dir");
  add_config_flags(tr, g);

  std::string checkpoint, detections, test_dir;
  std::optional<double> source_only_map, oracle_map;
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint or detection files");
  ev->add_option("--checkpoint", checkpoint, "student checkpoint");
  ev->add_option("--detections", detections, "directory of <id>.txt detection files");
  ev->add_option("--test-dir", test_dir, "labeled dataset root (images/, labels/)");
  ev->add_option("--source-only-map", source_only_map, "reference mAP50 for Gain");
  ev->add_option("--oracle-map", oracle_map, "reference mAP50 for Rel.");
  add_config_flags(ev, g);

  std::string sweep;
  auto* ab = app.add_subcommand("ablate", "sweep one parameter, one run per value");
  ab->add_option("--sweep", sweep, "parameter=v1,v2,...")->required();
  add_config_flags(ab, g);

  std::vector<std::string> runs;
  auto* pl = app.add_subcommand("plot", "loss and mAP curves for run directories");
  pl->add_option("--runs", runs, "run directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(g);
    if (sty->parsed()) return cmd_stylize(g, input, direction);
    if (tr->parsed()) return cmd_train(g, resume);
    if (ev->parsed()) {
      return cmd_eval(g, checkpoint, detections, test_dir, source_only_map, oracle_map);
    }
    if (ab->parsed()) return cmd_ablate(g, sweep);
    if (pl->parsed()) return cmd_plot(g, runs);
  } catch (const ssda::Error& e) {
    std::cerr << "error[" << e.kind() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
