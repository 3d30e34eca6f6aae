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

#ifndef SSDA_CHECKPOINT_H_
#define SSDA_CHECKPOINT_H_

#include <map>
#include <optional>
#include <string>

#include "ssda/detector.h"
#include "ssda/param_set.h"

namespace ssda {

// On-disk layout: a text header
//
//   SSDA-CHECKPOINT 1
//   meta.<key> = <value>            (role, version, config_hash, ...)
//   detector.<key> = <value>        (serialized DetectorConfig)
//   param <name> f32 <d0,d1,...>    (one per parameter, schema order)
//   END
//
// followed by the little-endian arrays in schema order. The element type is
// f32, or f64 for the teacher's running average; one file uses one type.
struct Checkpoint {
  DetectorConfig config;
  ParamSet<float> params;
  // Set only for f64 files; `params` then holds its float rounding.
  std::optional<ParamSet<double>> precise;
  std::map<std::string, std::string> metadata;
};

void save_checkpoint(const std::string& path, const DetectorConfig& config,
                     const ParamSet<float>& params,
                     const std::map<std::string, std::string>& metadata = {});
void save_checkpoint(const std::string& path, const DetectorConfig& config,
                     const ParamSet<double>& params,
                     const std::map<std::string, std::string>& metadata = {});

Checkpoint load_checkpoint(const std::string& path);

// Also checks that the stored config and schema equal `expected`.
Checkpoint load_checkpoint(const std::string& path, const DetectorConfig& expected);

}  // namespace ssda

#endif  // SSDA_CHECKPOINT_H_
