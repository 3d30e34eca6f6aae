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

#include "ssda/domain_data.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ssda/errors.h"
#include "ssda/image_io.h"

namespace fs = std::filesystem;

namespace ssda {
namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double luma(const std::array<double, 3>& c) {
  return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
}

struct Shape {
  ShapeKind kind;
  BBox box;
  bool inside(double x, double y) const {
    switch (kind) {
      case ShapeKind::kCircle: {
        const double cx = 0.5 * (box.x1 + box.x2);
        const double cy = 0.5 * (box.y1 + box.y2);
        const double r = 0.5 * box.width();
        return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
      }
      case ShapeKind::kSquare:
        return x >= box.x1 && x <= box.x2 && y >= box.y1 && y <= box.y2;
      case ShapeKind::kTriangle: {
        // Apex at top center, base along the bottom edge.
        if (y < box.y1 || y > box.y2) return false;
        const double frac = (y - box.y1) / box.height();
        const double half = 0.5 * box.width() * frac;
        const double cx = 0.5 * (box.x1 + box.x2);
        return x >= cx - half && x <= cx + half;
      }
    }
    return false;
  }
};

void paint(Image& img, const Shape& shape, const std::array<double, 3>& color) {
  constexpr int kSub = 4;
  const int x0 = std::max(0, static_cast<int>(std::floor(shape.box.x1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(shape.box.y1)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(shape.box.x2)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(shape.box.y2)));
  for (int py = y0; py <= y1; ++py) {
    for (int px = x0; px <= x1; ++px) {
      int hits = 0;
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          hits += shape.inside(px + (sx + 0.5) / kSub, py + (sy + 0.5) / kSub);
        }
      }
      if (!hits) continue;
      const double cov = static_cast<double>(hits) / (kSub * kSub);
      for (int ch = 0; ch < 3; ++ch) {
        float& v = img.at(py, px, ch);
        v = static_cast<float>(v * (1.0 - cov) + color[ch] * cov);
      }
    }
  }
}

Dataset render_split(const SynthConfig& cfg, Domain domain, const std::string& prefix,
                     int count, uint64_t stream) {
  std::vector<Sample> samples;
  samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s_%05d", prefix.c_str(), i);
    std::mt19937_64 rng(mix_seed(stream, static_cast<uint64_t>(i)));
    Sample s = render_scene(cfg, rng, id);
    const StyleSpec& style =
        domain == Domain::kSource ? cfg.source_style : cfg.target_style;
    s.image = stylize(s.image, style, s.id);
    samples.push_back(std::move(s));
  }
  return Dataset(domain, std::move(samples));
}

std::string domain_name(Domain d) { return d == Domain::kSource ? "source" : "target"; }

}  // namespace

Dataset::Dataset(Domain domain, std::vector<Sample> samples)
    : domain_(domain),
      samples_(std::make_shared<const std::vector<Sample>>(std::move(samples))) {}

const Image& Dataset::fake_image(size_t i) const {
  const Image& fake = (*samples_)[i].fake_image;
  if (fake.empty()) {
    throw ConfigError("sample '" + id(i) + "' has no paired fake image");
  }
  return fake;
}

bool Dataset::has_fakes() const {
  if (!samples_) return false;
  return std::all_of(samples_->begin(), samples_->end(),
                     [](const Sample& s) { return !s.fake_image.empty(); });
}

const std::vector<LabeledBox>& Dataset::labels(size_t i) const {
  if (labels_hidden_) {
    throw LabelAccessError("labels of " + domain_name(domain_) + " sample '" + id(i) +
                           "' are hidden in this run");
  }
  return (*samples_)[i].labels;
}

Dataset Dataset::without_labels() const {
  Dataset view = *this;
  view.labels_hidden_ = true;
  return view;
}

Dataset Dataset::with_fakes(const StyleSpec& spec) const {
  std::vector<Sample> samples = samples_ ? *samples_ : std::vector<Sample>{};
  for (Sample& s : samples) s.fake_image = stylize(s.image, spec, s.id);
  Dataset out(domain_, std::move(samples));
  out.labels_hidden_ = labels_hidden_;
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.domain_ != b.domain_ || a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    const Sample& x = (*a.samples_)[i];
    const Sample& y = (*b.samples_)[i];
    if (x.id != y.id || !(x.image == y.image) || !(x.fake_image == y.fake_image) ||
        x.labels != y.labels) {
      return false;
    }
  }
  return true;
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kCircle:
      return "circle";
    case ShapeKind::kSquare:
      return "square";
    case ShapeKind::kTriangle:
      return "triangle";
  }
  return "circle";
}

ShapeKind parse_shape_kind(const std::string& text) {
  if (text == "circle") return ShapeKind::kCircle;
  if (text == "square") return ShapeKind::kSquare;
  if (text == "triangle") return ShapeKind::kTriangle;
  throw ConfigError("unknown shape '" + text + "'");
}

StyleSpec SynthConfig::default_target_style() {
  StyleSpec s;
  s.mode = StyleMode::kAnalytic;
  s.fog_t = 0.45;
  s.atmosphere = {0.78, 0.80, 0.84};
  s.hue_degrees = 140.0;
  s.gain = {1.0, 0.9, 1.1};
  s.noise_sigma = 0.06;
  s.noise_seed = 101;
  return s;
}

StyleSpec default_source_to_target_style() {
  StyleSpec s;
  s.mode = StyleMode::kAnalytic;
  s.fog_t = 0.5;
  s.atmosphere = {0.8, 0.8, 0.8};
  s.hue_degrees = 120.0;
  s.noise_sigma = 0.05;
  s.noise_seed = 202;
  return s;
}

StyleSpec default_target_to_source_style() {
  StyleSpec s;
  s.mode = StyleMode::kAnalytic;
  s.gain = {2.0, 2.0, 2.0};
  s.bias = {-0.8, -0.8, -0.8};
  s.hue_degrees = -120.0;
  return s;
}

void SynthConfig::validate() const {
  if (image_size < 16) throw ConfigError("synthetic image_size must be >= 16");
  if (shapes.empty()) throw ConfigError("synthetic benchmark needs at least one shape");
  if (min_objects < 0 || max_objects < min_objects) {
    throw ConfigError("objects per image range is invalid");
  }
  if (!(min_object_size >= 4.0) || max_object_size < min_object_size ||
      max_object_size > image_size - 4) {
    throw ConfigError("object size range is invalid for the image size");
  }
  if (train_src < 0 || train_tgt < 0 || test_tgt < 0) {
    throw ConfigError("dataset counts must be non-negative");
  }
  source_style.validate();
  target_style.validate();
}

void write_synth_config(KeyValues& kv, const SynthConfig& cfg) {
  kv.set("synth.image_size", std::to_string(cfg.image_size));
  std::string shapes;
  for (size_t i = 0; i < cfg.shapes.size(); ++i) {
    if (i) shapes += ',';
    shapes += to_string(cfg.shapes[i]);
  }
  kv.set("synth.shapes", shapes);
  kv.set("synth.min_objects", std::to_string(cfg.min_objects));
  kv.set("synth.max_objects", std::to_string(cfg.max_objects));
  kv.set("synth.min_object_size", format_double(cfg.min_object_size));
  kv.set("synth.max_object_size", format_double(cfg.max_object_size));
  kv.set("synth.train_src", std::to_string(cfg.train_src));
  kv.set("synth.train_tgt", std::to_string(cfg.train_tgt));
  kv.set("synth.test_tgt", std::to_string(cfg.test_tgt));
  kv.set("synth.seed", std::to_string(cfg.seed));
  write_style_spec(kv, "synth.source_style.", cfg.source_style);
  write_style_spec(kv, "synth.target_style.", cfg.target_style);
}

SynthConfig read_synth_config(const KeyValues& kv, SynthConfig cfg) {
  auto get = [&](const std::string& k) { return kv.get("synth." + k); };
  if (auto v = get("image_size")) cfg.image_size = parse_int("synth.image_size", *v);
  if (auto v = get("shapes")) {
    cfg.shapes.clear();
    for (const std::string& s : split(*v, ',')) cfg.shapes.push_back(parse_shape_kind(s));
  }
  if (auto v = get("min_objects")) cfg.min_objects = parse_int("synth.min_objects", *v);
  if (auto v = get("max_objects")) cfg.max_objects = parse_int("synth.max_objects", *v);
  if (auto v = get("min_object_size")) {
    cfg.min_object_size = parse_double("synth.min_object_size", *v);
  }
  if (auto v = get("max_object_size")) {
    cfg.max_object_size = parse_double("synth.max_object_size", *v);
  }
  if (auto v = get("train_src")) cfg.train_src = parse_int("synth.train_src", *v);
  if (auto v = get("train_tgt")) cfg.train_tgt = parse_int("synth.train_tgt", *v);
  if (auto v = get("test_tgt")) cfg.test_tgt = parse_int("synth.test_tgt", *v);
  if (auto v = get("seed")) cfg.seed = std::stoull(*v);
  cfg.source_style = read_style_spec(kv, "synth.source_style.", cfg.source_style);
  cfg.target_style = read_style_spec(kv, "synth.target_style.", cfg.target_style);
  cfg.validate();
  return cfg;
}

Sample render_scene(const SynthConfig& cfg, std::mt19937_64& rng, const std::string& id) {
  const int size = cfg.image_size;
  Sample sample;
  sample.id = id;
  sample.image = Image(size, size);

  std::array<double, 3> base;
  for (double& c : base) c = uniform(rng, 0.15, 0.85);
  struct Grating {
    double amp, fx, fy, phase;
    std::array<double, 3> tint;
  };
  std::vector<Grating> gratings(3);
  for (Grating& g : gratings) {
    g.amp = uniform(rng, 0.03, 0.09);
    const double wavelength = uniform(rng, 6.0, 30.0);
    const double angle = uniform(rng, 0.0, std::numbers::pi);
    g.fx = std::cos(angle) / wavelength;
    g.fy = std::sin(angle) / wavelength;
    g.phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    for (double& t : g.tint) t = uniform(rng, 0.5, 1.5);
  }
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        double v = base[ch];
        for (const Grating& g : gratings) {
          v += g.amp * g.tint[ch] *
               std::sin(2.0 * std::numbers::pi * (g.fx * x + g.fy * y) + g.phase);
        }
        sample.image.at(y, x, ch) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }

  const int n_objects = uniform_int(rng, cfg.min_objects, cfg.max_objects);
  std::vector<BBox> placed;
  for (int i = 0; i < n_objects; ++i) {
    for (int attempt = 0; attempt < 40; ++attempt) {
      const int cls = uniform_int(rng, 0, cfg.num_classes() - 1);
      const ShapeKind kind = cfg.shapes[cls];
      const double w = uniform(rng, cfg.min_object_size, cfg.max_object_size);
      const double h = kind == ShapeKind::kTriangle ? w * uniform(rng, 0.8, 1.0) : w;
      const double x1 = uniform(rng, 1.0, size - 1.0 - w);
      const double y1 = uniform(rng, 1.0, size - 1.0 - h);
      const BBox box{x1, y1, x1 + w, y1 + h};
      const BBox margin{box.x1 - 2, box.y1 - 2, box.x2 + 2, box.y2 + 2};
      bool clash = false;
      for (const BBox& other : placed) {
        if (intersection_area(margin, other) > 0.0) {
          clash = true;
          break;
        }
      }
      if (clash) continue;

      std::array<double, 3> color{};
      for (int tries = 0; tries < 20; ++tries) {
        for (double& c : color) c = uniform(rng, 0.0, 1.0);
        if (std::abs(luma(color) - luma(base)) >= 0.25) break;
      }
      paint(sample.image, Shape{kind, box}, color);
      placed.push_back(box);
      sample.labels.push_back({box, cls});
      break;
    }
  }
  return sample;
}

SyntheticBenchmark generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  SyntheticBenchmark bench;
  bench.source_train = render_split(cfg, Domain::kSource, "src", cfg.train_src,
                                    mix_seed(cfg.seed, 1));
  bench.target_train = render_split(cfg, Domain::kTarget, "tgt", cfg.train_tgt,
                                    mix_seed(cfg.seed, 2));
  bench.target_test = render_split(cfg, Domain::kTarget, "test", cfg.test_tgt,
                                   mix_seed(cfg.seed, 3));
  return bench;
}

std::vector<LabeledBox> parse_labels(const std::string& text, int width, int height,
                                     const std::string& source_name) {
  std::vector<LabeledBox> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = source_name + ":" + std::to_string(line_no) + ": ";
    std::istringstream fields(line);
    std::vector<std::string> tok;
    std::string t;
    while (fields >> t) tok.push_back(t);
    if (tok.size() != 5) {
      throw ParseError(where + "expected 5 fields (class_id cx cy w h), got " +
                       std::to_string(tok.size()));
    }
    int cls = 0;
    try {
      cls = parse_int("class_id", tok[0]);
    } catch (const ConfigError&) {
      throw ParseError(where + "class_id '" + tok[0] + "' is not an integer");
    }
    if (cls < 0) throw ParseError(where + "class_id must be non-negative");
    double v[4];
    for (int k = 0; k < 4; ++k) {
      try {
        v[k] = parse_double("coordinate", tok[k + 1]);
      } catch (const ConfigError&) {
        throw ParseError(where + "'" + tok[k + 1] + "' is not a number");
      }
      if (!(v[k] >= 0.0 && v[k] <= 1.0)) {
        throw ParseError(where + "value '" + tok[k + 1] + "' outside [0, 1]");
      }
    }
    const BBox box = from_center({v[0] * width, v[1] * height, v[2] * width, v[3] * height});
    out.push_back({clip(box, width, height), cls});
  }
  return out;
}

std::string format_labels(const std::vector<LabeledBox>& labels, int width, int height) {
  std::string out;
  char buf[128];
  for (const LabeledBox& l : labels) {
    const CenterBox c = to_center(l.box);
    std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f\n", l.class_id, c.cx / width,
                  c.cy / height, c.w / width, c.h / height);
    out += buf;
  }
  return out;
}

Dataset load_dataset(const fs::path& root, Domain domain, const fs::path& fake_dir) {
  const fs::path images_dir = root / "images";
  const fs::path labels_dir = root / "labels";
  if (!fs::is_directory(images_dir)) {
    throw IoError("dataset root " + root.string() + " has no images/ directory");
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(images_dir)) {
    if (e.is_regular_file() && is_supported_image(e.path().string())) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.stem() < b.stem(); });

  PairingTable pairing;
  if (!fake_dir.empty()) pairing = build_pairing(images_dir, fake_dir);

  std::vector<Sample> samples;
  for (const fs::path& f : files) {
    Sample s;
    s.id = f.stem().string();
    s.image = read_png(f.string());
    const fs::path label_path = labels_dir / (s.id + ".txt");
    if (fs::exists(label_path)) {
      std::ifstream in(label_path);
      std::stringstream ss;
      ss << in.rdbuf();
      s.labels = parse_labels(ss.str(), s.image.width, s.image.height, label_path.string());
    }
    if (!fake_dir.empty()) {
      s.fake_image = read_png((fake_dir / pairing.at(f.filename().string())).string());
      if (s.fake_image.width != s.image.width || s.fake_image.height != s.image.height) {
        throw PairingError("fake image for '" + s.id + "' differs in size");
      }
    }
    samples.push_back(std::move(s));
  }
  return Dataset(domain, std::move(samples));
}

void write_dataset(const fs::path& root, const Dataset& dataset, bool include_labels) {
  fs::create_directories(root / "images");
  if (include_labels) fs::create_directories(root / "labels");
  for (size_t i = 0; i < dataset.size(); ++i) {
    const Image& img = dataset.image(i);
    write_png((root / "images" / (dataset.id(i) + ".png")).string(), img);
    if (include_labels) {
      std::ofstream out(root / "labels" / (dataset.id(i) + ".txt"), std::ios::trunc);
      out << format_labels(dataset.labels(i), img.width, img.height);
    }
  }
}

void write_fakes(const fs::path& dir, const Dataset& dataset) {
  fs::create_directories(dir);
  for (size_t i = 0; i < dataset.size(); ++i) {
    write_png((dir / (dataset.id(i) + ".png")).string(), dataset.fake_image(i));
  }
}

BBox Letterbox::apply(const BBox& b) const {
  return {b.x1 * scale + pad_x, b.y1 * scale + pad_y, b.x2 * scale + pad_x,
          b.y2 * scale + pad_y};
}

Letterbox letterbox_geometry(int width, int height, int size) {
  Letterbox lb;
  lb.scale = std::min(static_cast<double>(size) / width, static_cast<double>(size) / height);
  lb.new_width = std::clamp(static_cast<int>(std::lround(width * lb.scale)), 1, size);
  lb.new_height = std::clamp(static_cast<int>(std::lround(height * lb.scale)), 1, size);
  lb.pad_x = (size - lb.new_width) / 2;
  lb.pad_y = (size - lb.new_height) / 2;
  return lb;
}

Image letterbox(const Image& image, int size, float pad, Letterbox* geometry) {
  const Letterbox lb = letterbox_geometry(image.width, image.height, size);
  if (geometry) *geometry = lb;
  if (image.width == size && image.height == size) return image;
  Image out(size, size, pad);
  const double sx = static_cast<double>(image.width) / lb.new_width;
  const double sy = static_cast<double>(image.height) / lb.new_height;
  for (int y = 0; y < lb.new_height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < lb.new_width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = image.at(y0, x0, ch) * (1 - wx) + image.at(y0, x1, ch) * wx;
        const double bot = image.at(y1, x0, ch) * (1 - wx) + image.at(y1, x1, ch) * wx;
        out.at(y + lb.pad_y, x + lb.pad_x, ch) = static_cast<float>(top * (1 - wy) + bot * wy);
      }
    }
  }
  return out;
}

Image hflip(const Image& image) {
  Image out(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int ch = 0; ch < 3; ++ch) out.at(y, x, ch) = image.at(y, image.width - 1 - x, ch);
    }
  }
  return out;
}

std::vector<LabeledBox> hflip(const std::vector<LabeledBox>& labels, int width) {
  std::vector<LabeledBox> out = labels;
  for (LabeledBox& l : out) {
    const double x1 = width - l.box.x2;
    const double x2 = width - l.box.x1;
    l.box.x1 = x1;
    l.box.x2 = x2;
  }
  return out;
}

Image brightness_contrast(const Image& image, double brightness, double contrast) {
  Image out = image;
  for (float& v : out.pixels) {
    v = static_cast<float>(std::clamp((v - 0.5) * contrast + 0.5 + brightness, 0.0, 1.0));
  }
  return out;
}

uint64_t mix_seed(uint64_t a, uint64_t b) {
  // splitmix64 finalizer over the combined words.
  uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<size_t> seeded_permutation(size_t n, uint64_t seed) {
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (size_t i = n; i > 1; --i) {
    const size_t j = static_cast<size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

BatchStream::BatchStream(Dataset source, Dataset target, int batch_pairs, uint64_t seed,
                         int epoch, int image_size, float pad, bool need_source_labels)
    : source_(std::move(source)),
      target_(std::move(target)),
      batch_pairs_(batch_pairs),
      image_size_(image_size),
      pad_(pad),
      need_source_labels_(need_source_labels) {
  if (batch_pairs_ < 1) throw ConfigError("batch_pairs must be >= 1");
  if (source_.empty() || target_.empty()) {
    throw ConfigError("batch assembly needs non-empty source and target datasets");
  }
  const uint64_t epoch_seed = mix_seed(seed, static_cast<uint64_t>(epoch));
  source_order_ = seeded_permutation(source_.size(), mix_seed(epoch_seed, 0x51));
  target_order_ = seeded_permutation(target_.size(), mix_seed(epoch_seed, 0x7A));
  const size_t longest = std::max(source_.size(), target_.size());
  num_batches_ = (longest + batch_pairs_ - 1) / batch_pairs_;
}

bool BatchStream::next(DomainBatch& batch) {
  if (cursor_ >= num_batches_) return false;
  batch = DomainBatch{};
  const bool src_fakes = source_.has_fakes();
  const bool tgt_fakes = target_.has_fakes();
  for (int j = 0; j < batch_pairs_; ++j) {
    const size_t slot = cursor_ * batch_pairs_ + j;
    const size_t si = source_order_[slot % source_.size()];
    const size_t ti = target_order_[slot % target_.size()];

    Letterbox lb;
    batch.source_ids.push_back(source_.id(si));
    batch.source.push_back(letterbox(source_.image(si), image_size_, pad_, &lb));
    batch.source_fake.push_back(src_fakes ? letterbox(source_.fake_image(si), image_size_, pad_)
                                          : Image{});
    std::vector<LabeledBox> labels;
    if (need_source_labels_) {
      for (const LabeledBox& l : source_.labels(si)) {
        labels.push_back({clip(lb.apply(l.box), image_size_, image_size_), l.class_id});
      }
    }
    batch.source_labels.push_back(std::move(labels));

    batch.target_ids.push_back(target_.id(ti));
    batch.target.push_back(letterbox(target_.image(ti), image_size_, pad_));
    batch.target_fake.push_back(tgt_fakes ? letterbox(target_.fake_image(ti), image_size_, pad_)
                                          : Image{});
  }
  ++cursor_;
  return true;
}

}  // namespace ssda
