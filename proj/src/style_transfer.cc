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

#include "ssda/style_transfer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "ssda/errors.h"
#include "ssda/image_io.h"

namespace fs = std::filesystem;

namespace ssda {
namespace {

std::string triple(const std::array<double, 3>& v) {
  return join_doubles({v[0], v[1], v[2]});
}

std::array<double, 3> parse_triple(const std::string& key, const std::string& text) {
  const std::vector<double> v = parse_double_list(key, text);
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() != 3) throw ConfigError("key '" + key + "' needs 1 or 3 values");
  return {v[0], v[1], v[2]};
}

// Image files of a directory keyed by stem.
std::map<std::string, std::string> images_by_stem(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw PairingError("not a directory: " + dir.string());
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (!is_supported_image(name)) continue;
    const std::string stem = entry.path().stem().string();
    if (!out.emplace(stem, name).second) {
      throw PairingError("duplicate stem '" + stem + "' in " + dir.string());
    }
  }
  return out;
}

}  // namespace

std::string to_string(StyleMode mode) {
  switch (mode) {
    case StyleMode::kIdentity:
      return "identity";
    case StyleMode::kAnalytic:
      return "analytic";
    case StyleMode::kFromDisk:
      return "from_disk";
  }
  return "identity";
}

StyleMode parse_style_mode(const std::string& text) {
  if (text == "identity") return StyleMode::kIdentity;
  if (text == "analytic") return StyleMode::kAnalytic;
  if (text == "from_disk") return StyleMode::kFromDisk;
  throw ConfigError("unknown style mode '" + text + "'");
}

void StyleSpec::validate() const {
  if (mode == StyleMode::kAnalytic) {
    if (!(fog_t > 0.0 && fog_t <= 1.0)) throw ConfigError("fog_t must lie in (0, 1]");
    for (double a : atmosphere) {
      if (a < 0.0 || a > 1.0) throw ConfigError("atmosphere must lie in [0, 1]");
    }
    if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be non-negative");
  }
  if (mode == StyleMode::kFromDisk && disk_dir.empty()) {
    throw ConfigError("from_disk style needs disk_dir");
  }
}

std::string StyleSpec::canonical_text() const {
  KeyValues kv;
  write_style_spec(kv, "", *this);
  return kv.to_text();
}

std::string StyleSpec::hash() const { return hex64(fnv1a64(canonical_text())); }

void write_style_spec(KeyValues& kv, const std::string& prefix, const StyleSpec& spec) {
  kv.set(prefix + "mode", to_string(spec.mode));
  kv.set(prefix + "fog_t", format_double(spec.fog_t));
  kv.set(prefix + "atmosphere", triple(spec.atmosphere));
  kv.set(prefix + "gain", triple(spec.gain));
  kv.set(prefix + "bias", triple(spec.bias));
  kv.set(prefix + "hue_degrees", format_double(spec.hue_degrees));
  kv.set(prefix + "noise_sigma", format_double(spec.noise_sigma));
  kv.set(prefix + "noise_seed", std::to_string(spec.noise_seed));
  kv.set(prefix + "disk_dir", spec.disk_dir);
}

StyleSpec read_style_spec(const KeyValues& kv, const std::string& prefix,
                          StyleSpec spec) {
  auto get = [&](const std::string& k) { return kv.get(prefix + k); };
  if (auto v = get("mode")) spec.mode = parse_style_mode(*v);
  if (auto v = get("fog_t")) spec.fog_t = parse_double(prefix + "fog_t", *v);
  if (auto v = get("atmosphere")) spec.atmosphere = parse_triple(prefix + "atmosphere", *v);
  if (auto v = get("gain")) spec.gain = parse_triple(prefix + "gain", *v);
  if (auto v = get("bias")) spec.bias = parse_triple(prefix + "bias", *v);
  if (auto v = get("hue_degrees")) spec.hue_degrees = parse_double(prefix + "hue_degrees", *v);
  if (auto v = get("noise_sigma")) spec.noise_sigma = parse_double(prefix + "noise_sigma", *v);
  if (auto v = get("noise_seed")) {
    spec.noise_seed = static_cast<uint64_t>(std::stoull(*v));
  }
  if (auto v = get("disk_dir")) spec.disk_dir = *v;
  spec.validate();
  return spec;
}

Image stylize(const Image& image, const StyleSpec& spec, const std::string& image_id) {
  spec.validate();
  if (spec.mode == StyleMode::kIdentity) return image;

  if (spec.mode == StyleMode::kFromDisk) {
    const fs::path dir(spec.disk_dir);
    const std::string stem = fs::path(image_id).stem().string();
    const fs::path candidate = dir / (stem + ".png");
    if (!fs::exists(candidate)) {
      throw PairingError("missing fake image for '" + image_id + "': " +
                         candidate.string());
    }
    Image fake = read_png(candidate.string());
    if (fake.width != image.width || fake.height != image.height) {
      throw PairingError("fake image " + candidate.string() +
                         " differs in size from its real counterpart");
    }
    return fake;
  }

  Image out = image;
  const size_t n_pixels = static_cast<size_t>(image.width) * image.height;

  if (spec.hue_degrees != 0.0) {
    const double theta = spec.hue_degrees * std::numbers::pi / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta) / std::sqrt(3.0);
    const double k = (1.0 - c) / 3.0;
    const double m[3][3] = {{c + k, k - s, k + s}, {k + s, c + k, k - s}, {k - s, k + s, c + k}};
    for (size_t p = 0; p < n_pixels; ++p) {
      float* px = &out.pixels[p * 3];
      const double r = px[0], g = px[1], b = px[2];
      for (int ch = 0; ch < 3; ++ch) {
        px[ch] = static_cast<float>(m[ch][0] * r + m[ch][1] * g + m[ch][2] * b);
      }
    }
  }

  const double t = spec.fog_t;
  for (size_t p = 0; p < n_pixels; ++p) {
    for (int ch = 0; ch < 3; ++ch) {
      float& v = out.pixels[p * 3 + ch];
      double x = spec.gain[ch] * v + spec.bias[ch];
      x = x * t + spec.atmosphere[ch] * (1.0 - t);
      v = static_cast<float>(x);
    }
  }

  if (spec.noise_sigma > 0.0) {
    std::mt19937_64 rng(spec.noise_seed ^ fnv1a64(image_id));
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (float& v : out.pixels) v = static_cast<float>(v + noise(rng));
  }

  for (float& v : out.pixels) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

PairingTable build_pairing(const fs::path& real_dir, const fs::path& fake_dir) {
  const auto real = images_by_stem(real_dir);
  const auto fake = images_by_stem(fake_dir);
  PairingTable table;
  for (const auto& [stem, name] : real) {
    auto it = fake.find(stem);
    if (it == fake.end()) {
      throw PairingError("no fake image for '" + stem + "' (" + name + ") in " +
                         fake_dir.string());
    }
    table[name] = it->second;
  }
  for (const auto& [stem, name] : fake) {
    if (!real.count(stem)) {
      throw PairingError("fake image '" + name + "' has no real counterpart '" + stem +
                         "' in " + real_dir.string());
    }
  }
  return table;
}

size_t stylize_directory(const fs::path& real_dir, const fs::path& out_dir,
                         const StyleSpec& spec) {
  const auto real = images_by_stem(real_dir);
  fs::create_directories(out_dir);
  const std::string spec_hash = spec.hash();
  std::ofstream manifest(out_dir / "manifest.tsv", std::ios::trunc);
  if (!manifest) throw IoError("cannot write manifest in " + out_dir.string());
  for (const auto& [stem, name] : real) {
    const Image img = read_png((real_dir / name).string());
    const std::string fake_name = stem + ".png";
    write_png((out_dir / fake_name).string(), stylize(img, spec, stem));
    manifest << name << '\t' << fake_name << '\t' << spec_hash << '\n';
  }
  return real.size();
}

}  // namespace ssda
