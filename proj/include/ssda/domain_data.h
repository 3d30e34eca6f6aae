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

#ifndef SSDA_DOMAIN_DATA_H_
#define SSDA_DOMAIN_DATA_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ssda/config.h"
#include "ssda/geometry.h"
#include "ssda/image.h"
#include "ssda/style_transfer.h"

namespace ssda {

enum class Domain { kSource, kTarget };

struct Sample {
  std::string id;
  Image image;
  // Stylized counterpart (target-like for source, source-like for target).
  Image fake_image;
  std::vector<LabeledBox> labels;
};

// Immutable, cheaply copyable view over a list of samples. A view created by
// without_labels() refuses label access: that is how target labels are kept
// away from the trainer in adaptation modes.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Domain domain, std::vector<Sample> samples);

  size_t size() const { return samples_ ? samples_->size() : 0; }
  bool empty() const { return size() == 0; }
  Domain domain() const { return domain_; }

  const std::string& id(size_t i) const { return (*samples_)[i].id; }
  const Image& image(size_t i) const { return (*samples_)[i].image; }
  const Image& fake_image(size_t i) const;
  bool has_fakes() const;
  // Throws LabelAccessError on a label-hidden view.
  const std::vector<LabeledBox>& labels(size_t i) const;
  bool labels_hidden() const { return labels_hidden_; }

  Dataset without_labels() const;
  // New dataset whose fake images are stylize(image, spec, id).
  Dataset with_fakes(const StyleSpec& spec) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  Domain domain_ = Domain::kSource;
  std::shared_ptr<const std::vector<Sample>> samples_;
  bool labels_hidden_ = false;
};

enum class ShapeKind { kCircle, kSquare, kTriangle };

std::string to_string(ShapeKind kind);
ShapeKind parse_shape_kind(const std::string& text);

// Desk-scale two-domain benchmark. Class ids follow the order of `shapes`.
struct SynthConfig {
  int image_size = 96;
  std::vector<ShapeKind> shapes = {ShapeKind::kCircle, ShapeKind::kSquare,
                                   ShapeKind::kTriangle};
  int min_objects = 1;
  int max_objects = 3;
  double min_object_size = 14.0;
  double max_object_size = 36.0;
  StyleSpec source_style;  // identity: the source domain is rendered clean
  StyleSpec target_style = default_target_style();
  int train_src = 500;
  int train_tgt = 500;
  int test_tgt = 200;
  uint64_t seed = 7;

  int num_classes() const { return static_cast<int>(shapes.size()); }
  void validate() const;

  static StyleSpec default_target_style();
};

// Stylizers used with the synthetic benchmark: an imperfect estimate of the
// target style (makes I^s_f) and an approximate inverse of it (makes I^t_f).
StyleSpec default_source_to_target_style();
StyleSpec default_target_to_source_style();

void write_synth_config(KeyValues& kv, const SynthConfig& cfg);
SynthConfig read_synth_config(const KeyValues& kv, SynthConfig defaults = {});

struct SyntheticBenchmark {
  Dataset source_train;
  Dataset target_train;
  Dataset target_test;
};

SyntheticBenchmark generate_synthetic(const SynthConfig& cfg);

// Renders one clean image with its tight boxes; exposed for tests.
Sample render_scene(const SynthConfig& cfg, std::mt19937_64& rng, const std::string& id);

// Label files: one "class_id cx cy w h" line per object, center-normalized.
std::vector<LabeledBox> parse_labels(const std::string& text, int width, int height,
                                     const std::string& source_name);
std::string format_labels(const std::vector<LabeledBox>& labels, int width, int height);

// <root>/images/<stem>.png and <root>/labels/<stem>.txt; a missing label
// file means zero objects. Samples are sorted by id. When `fake_dir` is
// given the fakes are paired with build_pairing.
Dataset load_dataset(const std::filesystem::path& root, Domain domain,
                     const std::filesystem::path& fake_dir = {});
void write_dataset(const std::filesystem::path& root, const Dataset& dataset,
                   bool include_labels = true);
// Writes the fake images only (as PNG, same stems).
void write_fakes(const std::filesystem::path& dir, const Dataset& dataset);

struct Letterbox {
  double scale = 1.0;
  int pad_x = 0;
  int pad_y = 0;
  int new_width = 0;
  int new_height = 0;

  BBox apply(const BBox& b) const;
};

Letterbox letterbox_geometry(int width, int height, int size);
// Aspect-preserving bilinear resize onto a size x size canvas of `pad`.
Image letterbox(const Image& image, int size, float pad = 0.5f,
                Letterbox* geometry = nullptr);

Image hflip(const Image& image);
std::vector<LabeledBox> hflip(const std::vector<LabeledBox>& labels, int width);
// x' = clip((x - 0.5) * contrast + 0.5 + brightness).
Image brightness_contrast(const Image& image, double brightness, double contrast);

// Four-image training unit: source images with labels and their
// target-like fakes, target images and their source-like fakes. Pairs are
// index-aligned.
struct DomainBatch {
  std::vector<std::string> source_ids;
  std::vector<Image> source;
  std::vector<Image> source_fake;
  std::vector<std::vector<LabeledBox>> source_labels;
  std::vector<std::string> target_ids;
  std::vector<Image> target;
  std::vector<Image> target_fake;
};

// One epoch of batches. Source and target are shuffled independently with
// seeds derived from (seed, epoch); the batch count is
// ceil(max(|src|, |tgt|) / batch_pairs) and shorter streams wrap around.
class BatchStream {
 public:
  BatchStream(Dataset source, Dataset target, int batch_pairs, uint64_t seed, int epoch,
              int image_size, float pad = 0.5f, bool need_source_labels = true);

  size_t num_batches() const { return num_batches_; }
  bool next(DomainBatch& batch);
  void reset() { cursor_ = 0; }

 private:
  Dataset source_;
  Dataset target_;
  int batch_pairs_;
  int image_size_;
  float pad_;
  bool need_source_labels_;
  std::vector<size_t> source_order_;
  std::vector<size_t> target_order_;
  size_t num_batches_ = 0;
  size_t cursor_ = 0;
};

// Deterministic permutation of [0, n).
std::vector<size_t> seeded_permutation(size_t n, uint64_t seed);
uint64_t mix_seed(uint64_t a, uint64_t b);

}  // namespace ssda

#endif  // SSDA_DOMAIN_DATA_H_
