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

#ifndef SSDA_CLI_COMMANDS_H_
#define SSDA_CLI_COMMANDS_H_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ssda/config.h"
#include "ssda/domain_data.h"
#include "ssda/style_transfer.h"
#include "ssda/trainer.h"

namespace ssda {

// Everything a subcommand can be configured with. Keys in the flat config
// file: TrainConfig fields (no prefix), detector.*, synth.*, s2t.* and t2s.*
// (the two stylizers) and data_dir.
struct ExperimentConfig {
  TrainConfig train;
  SynthConfig synth;
  StyleSpec s2t = default_source_to_target_style();
  StyleSpec t2s = default_target_to_source_style();
  // Empty: the synthetic benchmark is rendered in memory from `synth`.
  std::string data_dir;
};

void write_experiment_config(KeyValues& kv, const ExperimentConfig& cfg);
// Rejects keys that are not part of the configuration surface.
ExperimentConfig read_experiment_config(const KeyValues& kv);
KeyValues default_config_kv();

// Source/target/test splits with fakes attached. Target training labels
// are hidden unless the mode is oracle.
TrainData build_train_data(const ExperimentConfig& cfg);

// The config.snapshot a training run in this configuration writes.
KeyValues run_snapshot(const ExperimentConfig& cfg);

// Refuses an out-dir that already holds a config.snapshot unless `force`.
void claim_out_dir(const std::filesystem::path& dir, const KeyValues& snapshot, bool force);
void write_snapshot(const std::filesystem::path& dir, const KeyValues& snapshot);

struct SweepSpec {
  std::string parameter;
  std::vector<std::string> values;
};

// "beta=0.5,1,2" style.
SweepSpec parse_sweep(const std::string& text);

// One sub-directory per grid point; duplicate or nested directories are
// fatal.
std::vector<std::filesystem::path> ablation_dirs(const std::filesystem::path& root,
                                                 const SweepSpec& sweep);

struct AblationRow {
  std::string value;
  std::filesystem::path run_dir;
  EvalReport report;
};

struct AblationResult {
  std::vector<AblationRow> rows;
  std::filesystem::path table_path;
  std::filesystem::path plot_path;
};

// Trains one run per grid point (shared seed) and writes ablation.tsv and
// ablation.svg under `root`. All directory checks happen before training.
AblationResult run_ablate(const ExperimentConfig& base, const SweepSpec& sweep,
                          const TrainData& data, const std::filesystem::path& root, bool force,
                          const std::function<void(const std::string&)>& log = {});

}  // namespace ssda

#endif  // SSDA_CLI_COMMANDS_H_
