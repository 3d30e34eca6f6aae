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

#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <string>

#include "ssda/errors.h"

namespace ssda {
namespace {

namespace fs = std::filesystem;

SynthConfig SmallSynth() {
  SynthConfig cfg;
  cfg.train_src = 12;
  cfg.train_tgt = 9;
  cfg.test_tgt = 5;
  return cfg;
}

TEST(LabelsTest, CenterNormalizedToCorners) {
  const auto labels = parse_labels("0 0.5 0.5 0.2 0.2\n", 100, 100, "a.txt");
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].class_id, 0);
  EXPECT_NEAR(labels[0].box.x1, 40, 1e-9);
  EXPECT_NEAR(labels[0].box.y1, 40, 1e-9);
  EXPECT_NEAR(labels[0].box.x2, 60, 1e-9);
  EXPECT_NEAR(labels[0].box.y2, 60, 1e-9);
}

TEST(LabelsTest, EmptyFileHasNoObjects) {
  EXPECT_TRUE(parse_labels("", 96, 96, "e.txt").empty());
  EXPECT_TRUE(parse_labels("\n\n", 96, 96, "e.txt").empty());
}

TEST(LabelsTest, FieldCountErrorNamesTheCount) {
  try {
    parse_labels("3 0.5 0.5 0.2\n", 96, 96, "bad.txt");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bad.txt:1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("5 fields"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_labels("0 1.5 0.5 0.2 0.2\n", 96, 96, "r.txt"), ParseError);
  EXPECT_THROW(parse_labels("-1 0.5 0.5 0.2 0.2\n", 96, 96, "r.txt"), ParseError);
}

TEST(LabelsTest, FormatRoundTrip) {
  const std::vector<LabeledBox> labels = {{{12, 30, 40, 50}, 2}, {{0, 0, 96, 96}, 0}};
  const auto back = parse_labels(format_labels(labels, 96, 96), 96, 96, "x");
  ASSERT_EQ(back.size(), 2u);
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].class_id, labels[i].class_id);
    EXPECT_NEAR(back[i].box.x1, labels[i].box.x1, 1e-3);
    EXPECT_NEAR(back[i].box.y2, labels[i].box.y2, 1e-3);
  }
}

TEST(SynthTest, DeterministicAndSized) {
  const SynthConfig cfg = SmallSynth();
  const SyntheticBenchmark a = generate_synthetic(cfg);
  const SyntheticBenchmark b = generate_synthetic(cfg);
  EXPECT_TRUE(a.source_train == b.source_train);
  EXPECT_TRUE(a.target_train == b.target_train);
  EXPECT_TRUE(a.target_test == b.target_test);
  EXPECT_EQ(a.source_train.size(), 12u);
  EXPECT_EQ(a.target_train.size(), 9u);
  EXPECT_EQ(a.target_test.size(), 5u);
  SynthConfig other = cfg;
  other.seed = cfg.seed + 1;
  EXPECT_FALSE(generate_synthetic(other).source_train == a.source_train);
}

TEST(SynthTest, DefaultCountsAreExact) {
  const SyntheticBenchmark bench = generate_synthetic(SynthConfig{});
  EXPECT_EQ(bench.source_train.size(), 500u);
  EXPECT_EQ(bench.target_train.size(), 500u);
  EXPECT_EQ(bench.target_test.size(), 200u);
}

TEST(SynthTest, BoxesLieInsideTheImageAndRespectSizes) {
  SynthConfig cfg = SmallSynth();
  cfg.train_src = 200;
  const SyntheticBenchmark bench = generate_synthetic(cfg);
  std::set<int> classes;
  for (size_t i = 0; i < bench.source_train.size(); ++i) {
    const auto& labels = bench.source_train.labels(i);
    EXPECT_GE(static_cast<int>(labels.size()), cfg.min_objects);
    EXPECT_LE(static_cast<int>(labels.size()), cfg.max_objects);
    for (const auto& l : labels) {
      classes.insert(l.class_id);
      EXPECT_GE(l.box.x1, 0.0);
      EXPECT_GE(l.box.y1, 0.0);
      EXPECT_LE(l.box.x2, cfg.image_size);
      EXPECT_LE(l.box.y2, cfg.image_size);
      EXPECT_GE(std::max(l.box.width(), l.box.height()), cfg.min_object_size - 1.0);
      EXPECT_LE(std::max(l.box.width(), l.box.height()), cfg.max_object_size + 1.0);
    }
  }
  EXPECT_EQ(classes.size(), 3u);
}

TEST(SynthTest, TargetDomainIsStylized) {
  const SyntheticBenchmark bench = generate_synthetic(SmallSynth());
  // Same scene generator, different streams and style: pixel statistics differ.
  double src_mean = 0.0, tgt_mean = 0.0;
  for (float v : bench.source_train.image(0).pixels) src_mean += v;
  for (float v : bench.target_train.image(0).pixels) tgt_mean += v;
  EXPECT_NE(src_mean, tgt_mean);
  EXPECT_EQ(bench.source_train.id(0), "src_00000");
  EXPECT_EQ(bench.target_train.id(0), "tgt_00000");
  EXPECT_EQ(bench.target_test.id(4), "test_00004");
}

TEST(DatasetTest, HiddenLabelsRefuseAccess) {
  const SyntheticBenchmark bench = generate_synthetic(SmallSynth());
  const Dataset hidden = bench.target_train.without_labels();
  EXPECT_TRUE(hidden.labels_hidden());
  EXPECT_THROW(hidden.labels(0), LabelAccessError);
  EXPECT_NO_THROW(bench.target_train.labels(0));
  EXPECT_FALSE(bench.source_train.has_fakes());
  EXPECT_THROW(bench.source_train.fake_image(0), ConfigError);
  const Dataset with = bench.source_train.with_fakes(default_source_to_target_style());
  EXPECT_TRUE(with.has_fakes());
  EXPECT_EQ(with.fake_image(3), stylize(with.image(3), default_source_to_target_style(),
                                        with.id(3)));
}

TEST(DatasetTest, DiskRoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "ssda_domain_data_test";
  fs::remove_all(dir);
  const SyntheticBenchmark bench = generate_synthetic(SmallSynth());
  write_dataset(dir / "src", bench.source_train);
  const Dataset fakes = bench.source_train.with_fakes(default_source_to_target_style());
  write_fakes(dir / "fake", fakes);
  const Dataset back = load_dataset(dir / "src", Domain::kSource, dir / "fake");
  ASSERT_EQ(back.size(), bench.source_train.size());
  for (size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back.id(i), bench.source_train.id(i));
    ASSERT_EQ(back.labels(i).size(), bench.source_train.labels(i).size());
    for (size_t k = 0; k < back.labels(i).size(); ++k) {
      EXPECT_NEAR(back.labels(i)[k].box.x1, bench.source_train.labels(i)[k].box.x1, 1e-3);
    }
    for (size_t p = 0; p < back.image(i).pixels.size(); ++p) {
      ASSERT_NEAR(back.image(i).pixels[p], bench.source_train.image(i).pixels[p], 0.002f);
      ASSERT_NEAR(back.fake_image(i).pixels[p], fakes.fake_image(i).pixels[p], 0.002f);
    }
  }
}

TEST(LetterboxTest, WideImageExample) {
  const Letterbox lb = letterbox_geometry(200, 100, 96);
  EXPECT_DOUBLE_EQ(lb.scale, 0.48);
  EXPECT_EQ(lb.pad_x, 0);
  EXPECT_EQ(lb.pad_y, 24);
  EXPECT_EQ(lb.apply({0, 0, 200, 100}), (BBox{0, 24, 96, 72}));
  const Image out = letterbox(Image(200, 100, 0.9f), 96);
  EXPECT_EQ(out.width, 96);
  EXPECT_FLOAT_EQ(out.at(0, 50, 1), 0.5f);
  EXPECT_FLOAT_EQ(out.at(48, 50, 1), 0.9f);
  EXPECT_FLOAT_EQ(out.at(95, 50, 1), 0.5f);
}

TEST(LetterboxTest, SquareInputOfTargetSizeIsUnchanged) {
  const Image im = generate_synthetic(SmallSynth()).source_train.image(0);
  EXPECT_EQ(letterbox(im, 96), im);
}

TEST(AugmentTest, FlipIsAnInvolutionAndMovesBoxes) {
  const Image im = generate_synthetic(SmallSynth()).source_train.image(1);
  EXPECT_EQ(hflip(hflip(im)), im);
  const std::vector<LabeledBox> labels = {{{10, 5, 30, 25}, 1}};
  const auto flipped = hflip(labels, 96);
  EXPECT_EQ(flipped[0].box, (BBox{66, 5, 86, 25}));
  EXPECT_EQ(hflip(flipped, 96), labels);
}

TEST(AugmentTest, BrightnessContrastFormula) {
  const Image out = brightness_contrast(Image(2, 2, 0.7f), 0.05, 1.5);
  for (float v : out.pixels) EXPECT_NEAR(v, (0.7 - 0.5) * 1.5 + 0.55, 1e-6);
  const Image clipped = brightness_contrast(Image(2, 2, 0.9f), 0.3, 2.0);
  for (float v : clipped.pixels) EXPECT_EQ(v, 1.0f);
  EXPECT_EQ(brightness_contrast(Image(2, 2, 0.3f), 0.0, 1.0), Image(2, 2, 0.3f));
}

TEST(BatchStreamTest, OnePairPerBatchAndWraparound) {
  const SyntheticBenchmark bench = generate_synthetic(SmallSynth());
  const Dataset src = bench.source_train.with_fakes(default_source_to_target_style());
  const Dataset tgt =
      bench.target_train.with_fakes(default_target_to_source_style()).without_labels();
  BatchStream stream(src, tgt, 1, 5, 0, 96);
  EXPECT_EQ(stream.num_batches(), 12u);
  DomainBatch batch;
  std::multiset<std::string> seen_src, seen_tgt;
  while (stream.next(batch)) {
    ASSERT_EQ(batch.source.size(), 1u);
    ASSERT_EQ(batch.source_fake.size(), 1u);
    ASSERT_EQ(batch.target.size(), 1u);
    ASSERT_EQ(batch.target_fake.size(), 1u);
    ASSERT_EQ(batch.source_labels.size(), 1u);
    seen_src.insert(batch.source_ids[0]);
    seen_tgt.insert(batch.target_ids[0]);
  }
  std::set<std::string> distinct_src(seen_src.begin(), seen_src.end());
  std::set<std::string> distinct_tgt(seen_tgt.begin(), seen_tgt.end());
  EXPECT_EQ(distinct_src.size(), 12u);
  EXPECT_EQ(distinct_tgt.size(), 9u);
  EXPECT_EQ(seen_tgt.size(), 12u);
}

TEST(BatchStreamTest, SameSeedAndEpochGiveSameSequence) {
  const SyntheticBenchmark bench = generate_synthetic(SmallSynth());
  auto ids = [&](uint64_t seed, int epoch) {
    BatchStream s(bench.source_train, bench.target_train.without_labels(), 2, seed, epoch, 96);
    std::vector<std::string> out;
    DomainBatch b;
    while (s.next(b)) {
      out.insert(out.end(), b.source_ids.begin(), b.source_ids.end());
      out.insert(out.end(), b.target_ids.begin(), b.target_ids.end());
    }
    return out;
  };
  EXPECT_EQ(ids(1, 3), ids(1, 3));
  EXPECT_NE(ids(1, 3), ids(1, 4));
  EXPECT_NE(ids(1, 3), ids(2, 3));
}

TEST(PermutationTest, IsAPermutation) {
  const auto p = seeded_permutation(50, 9);
  std::set<size_t> s(p.begin(), p.end());
  EXPECT_EQ(s.size(), 50u);
  EXPECT_EQ(*s.rbegin(), 49u);
  EXPECT_EQ(seeded_permutation(50, 9), p);
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
}

}  // namespace
}  // namespace ssda
