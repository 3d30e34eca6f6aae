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

#ifndef SSDA_STYLE_TRANSFER_H_
#define SSDA_STYLE_TRANSFER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "ssda/config.h"
#include "ssda/image.h"

namespace ssda {

enum class StyleMode { kIdentity, kAnalytic, kFromDisk };

std::string to_string(StyleMode mode);
StyleMode parse_style_mode(const std::string& text);

// Analytic image-to-image mapping standing in for an offline translator.
// Applied in order: hue rotation about the gray axis, per-channel
// gain/bias, atmospheric fog I*t + A*(1-t), additive Gaussian noise, and a
// final clip to [0, 1]. `from_disk` instead loads a pre-generated image with
// the same stem from `disk_dir`.
struct StyleSpec {
  StyleMode mode = StyleMode::kIdentity;
  double fog_t = 1.0;
  std::array<double, 3> atmosphere = {1.0, 1.0, 1.0};
  std::array<double, 3> gain = {1.0, 1.0, 1.0};
  std::array<double, 3> bias = {0.0, 0.0, 0.0};
  double hue_degrees = 0.0;
  double noise_sigma = 0.0;
  uint64_t noise_seed = 0;
  std::string disk_dir;

  void validate() const;
  // Stable textual form; `hash()` fingerprints it for manifests.
  std::string canonical_text() const;
  std::string hash() const;

  friend bool operator==(const StyleSpec&, const StyleSpec&) = default;
};

// Key-value round trip; keys are `<prefix>mode`, `<prefix>fog_t`, ...
void write_style_spec(KeyValues& kv, const std::string& prefix, const StyleSpec& spec);
StyleSpec read_style_spec(const KeyValues& kv, const std::string& prefix,
                          StyleSpec defaults = {});

// Deterministic in (image, spec, image_id); noise is seeded from both the
// spec's noise_seed and a hash of image_id.
Image stylize(const Image& image, const StyleSpec& spec, const std::string& image_id);

// real filename -> fake filename, matched by stem. Throws PairingError
// naming the first unmatched file on either side.
using PairingTable = std::map<std::string, std::string>;
PairingTable build_pairing(const std::filesystem::path& real_dir,
                           const std::filesystem::path& fake_dir);

// Stylizes every image in `real_dir` into `out_dir` (PNG) and writes
// `out_dir/manifest.tsv` with one "real<TAB>fake<TAB>spec-hash" line per image.
size_t stylize_directory(const std::filesystem::path& real_dir,
                         const std::filesystem::path& out_dir, const StyleSpec& spec);

}  // namespace ssda

#endif  // SSDA_STYLE_TRANSFER_H_
