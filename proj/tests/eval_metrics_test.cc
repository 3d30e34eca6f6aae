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

#include "ssda/eval_metrics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <string>

#include "eval_fixtures.h"
#include "oracles.h"
#include "ssda/errors.h"

namespace ssda {
namespace {

using fixtures::RandomFixture;
using fixtures::ToOracle;
using Fixture = fixtures::EvalFixture;

TEST(AveragePrecisionTest, PerfectDetector) {
  const std::vector<LabeledBox> gts = {{{0, 0, 10, 10}, 0}, {{20, 20, 30, 35}, 1}};
  const std::vector<Detection> dets = {{gts[0].box, 0, 0.9}, {gts[1].box, 1, 0.8}};
  const auto ap = average_precision(dets, gts, 0.5);
  ASSERT_EQ(ap.size(), 2u);
  EXPECT_DOUBLE_EQ(ap.at(0), 1.0);
  EXPECT_DOUBLE_EQ(ap.at(1), 1.0);
}

TEST(AveragePrecisionTest, NoDetections) {
  const std::vector<LabeledBox> gts = {{{0, 0, 10, 10}, 2}};
  const auto ap = average_precision({}, gts, 0.5);
  EXPECT_DOUBLE_EQ(ap.at(2), 0.0);
  EXPECT_TRUE(average_precision({}, {}, 0.5).empty());
}

TEST(AveragePrecisionTest, TruePositiveThenFalsePositive) {
  const std::vector<LabeledBox> gts = {{{0, 0, 10, 10}, 0}};
  const std::vector<Detection> dets = {{{0, 0, 10, 10}, 0, 0.9}, {{50, 50, 60, 60}, 0, 0.8}};
  EXPECT_DOUBLE_EQ(average_precision(dets, gts, 0.5).at(0), 1.0);
  // Reversed ranking: precision 1/2 at recall 1.
  const std::vector<Detection> rev = {{{0, 0, 10, 10}, 0, 0.7}, {{50, 50, 60, 60}, 0, 0.8}};
  EXPECT_DOUBLE_EQ(average_precision(rev, gts, 0.5).at(0), 0.5);
}

TEST(AveragePrecisionTest, MatchesHighestIouGroundTruth) {
  // The first detection overlaps both gts; matching it to the closer one
  // leaves the other gt for the second detection.
  const std::vector<LabeledBox> gts = {{{0, 0, 10, 10}, 0}, {{4, 0, 14, 10}, 0}};
  const std::vector<Detection> dets = {{{3.5, 0, 13.5, 10}, 0, 0.9}, {{0, 0, 10, 10}, 0, 0.8}};
  EXPECT_DOUBLE_EQ(average_precision(dets, gts, 0.5).at(0), 1.0);
}

TEST(AveragePrecisionTest, ElevenPointInterpolation) {
  const std::vector<LabeledBox> gts = {{{0, 0, 10, 10}, 0}, {{30, 0, 40, 10}, 0}};
  const std::vector<Detection> dets = {{{0, 0, 10, 10}, 0, 0.9}, {{60, 60, 70, 70}, 0, 0.8}};
  // Recall reaches 0.5 at precision 1: points 0.0 .. 0.5 give 6/11.
  EXPECT_NEAR(average_precision(dets, gts, 0.5, ApInterpolation::kElevenPoint).at(0), 6.0 / 11,
              1e-12);
  EXPECT_NEAR(average_precision(dets, gts, 0.5).at(0), 0.5, 1e-12);
}

TEST(MapReportTest, PerfectAcrossTenImages) {
  Fixture f;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "img" + std::to_string(i);
    f.gts[id] = {{{1.0 * i, 2, 20.0 + i, 30}, i % 3}};
    f.dets[id] = {{f.gts[id][0].box, i % 3, 0.5 + 0.01 * i}};
  }
  const EvalReport r = map_report(f.dets, f.gts);
  EXPECT_DOUBLE_EQ(r.map50, 100.0);
  EXPECT_DOUBLE_EQ(r.map50_95, 100.0);
  EXPECT_EQ(r.images, 10);
  EXPECT_EQ(r.gt_objects, 10);
  EXPECT_EQ(r.detections, 10);
}

TEST(MapReportTest, UnknownImageIsFatal) {
  Fixture f;
  f.gts["a"] = {};
  f.dets["b"] = {{{0, 0, 1, 1}, 0, 0.5}};
  EXPECT_THROW(map_report(f.dets, f.gts), Error);
}

TEST(MapReportTest, HandcraftedFixtureMatchesSweepOracle) {
  Fixture f;
  f.gts["a"] = {{{0, 0, 20, 20}, 0}, {{40, 40, 60, 60}, 1}};
  f.gts["b"] = {{{10, 10, 30, 40}, 0}, {{50, 0, 70, 20}, 0}};
  f.gts["c"] = {{{5, 50, 25, 70}, 1}};
  f.dets["a"] = {{{1, 1, 21, 21}, 0, 0.95}, {{41, 38, 60, 61}, 1, 0.6}, {{70, 70, 90, 90}, 0, 0.7}};
  f.dets["b"] = {{{10, 12, 30, 40}, 0, 0.85}, {{11, 11, 31, 41}, 0, 0.75}};
  f.dets["c"] = {{{6, 52, 24, 69}, 1, 0.9}, {{50, 0, 70, 20}, 1, 0.5}};
  const EvalReport r = map_report(f.dets, f.gts);
  const auto images = ToOracle(f);
  EXPECT_NEAR(r.map50, oracle::sweep_map(images, 0.5), 1e-9);
  EXPECT_NEAR(r.map75, oracle::sweep_map(images, 0.75), 1e-9);
  double sum = 0.0;
  for (int k = 0; k < 10; ++k) sum += oracle::sweep_map(images, 0.5 + 0.05 * k);
  EXPECT_NEAR(r.map50_95, sum / 10, 1e-9);
}

TEST(MapReportTest, RandomFixturesMatchSweepOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const Fixture f = RandomFixture(rng, 5, 10);
    const EvalReport r = map_report(f.dets, f.gts);
    const auto images = ToOracle(f);
    EXPECT_NEAR(r.map50, oracle::sweep_map(images, 0.5), 1e-9) << "trial " << trial;
    EXPECT_NEAR(r.map75, oracle::sweep_map(images, 0.75), 1e-9) << "trial " << trial;
  }
}

TEST(MapReportTest, Properties) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    Fixture f = RandomFixture(rng, 5, 10);
    const EvalReport base = map_report(f.dets, f.gts);
    EXPECT_LE(base.map50_95, base.map50 + 1e-12);
    EXPECT_GE(base.map50, 0.0);
    EXPECT_LE(base.map50, 100.0);

    // Strictly monotone score transform.
    Fixture g = f;
    for (auto& [id, d] : g.dets)
      for (auto& x : d) x.score = std::exp(3 * x.score) - 7;
    const EvalReport t = map_report(g.dets, g.gts);
    EXPECT_DOUBLE_EQ(t.map50, base.map50);
    EXPECT_DOUBLE_EQ(t.map50_95, base.map50_95);

    // A lowest-scored false positive never helps.
    Fixture h = f;
    const std::string id = h.gts.begin()->first;
    h.dets[id].push_back({{200, 200, 210, 210}, 0, -1.0});
    EXPECT_LE(map_report(h.dets, h.gts).map50, base.map50 + 1e-12);

    // Image processing order does not matter: rename images in reverse.
    Fixture rev;
    int n = static_cast<int>(f.gts.size());
    for (const auto& [k, v] : f.gts) rev.gts["z" + std::to_string(n) + k] = v, --n;
    n = static_cast<int>(f.gts.size());
    for (const auto& [k, v] : f.gts) {
      auto it = f.dets.find(k);
      if (it != f.dets.end()) rev.dets["z" + std::to_string(n) + k] = it->second;
      --n;
    }
    EXPECT_DOUBLE_EQ(map_report(rev.dets, rev.gts).map50, base.map50);
  }
}

TEST(GainRelTest, TableRows) {
  const GainRel swda = gain_rel(38.1, 27.7, 45.0);
  EXPECT_NEAR(swda.gain, 10.4, 0.05);
  ASSERT_TRUE(swda.rel.has_value());
  EXPECT_NEAR(*swda.rel, 84.7, 0.1);
  const GainRel umt = gain_rel(44.1, 27.7, 45.0);
  EXPECT_NEAR(*umt.rel, 98.0, 0.1);
  EXPECT_NEAR(umt.gain, 16.4, 0.05);
  EXPECT_EQ(gain_rel(30.0, 30.0, 50.0).gain, 0.0);
  EXPECT_FALSE(gain_rel(30.0, 20.0, 0.0).rel.has_value());
}

TEST(GainRelTest, AttachAndFormat) {
  EvalReport r;
  r.map50 = 40.0;
  r.ap50 = {{0, 30.0}, {1, 50.0}};
  attach_gain_rel(r, 30.0, 50.0);
  EXPECT_DOUBLE_EQ(*r.gain, 10.0);
  EXPECT_DOUBLE_EQ(*r.rel, 80.0);
  const std::string table = format_report_table(r, "base_DC", {"circle", "square"});
  EXPECT_NE(table.find("base_DC"), std::string::npos);
  EXPECT_NE(table.find("circle"), std::string::npos);
  const KeyValues kv = report_to_kv(r);
  EXPECT_EQ(*kv.get("mAP50"), "40");
  EXPECT_EQ(*kv.get("rel"), "80");
}

TEST(DetectionFileTest, RoundTripAndErrors) {
  const std::vector<Detection> dets = {{{10, 20, 30, 50}, 1, 0.875}, {{0, 0, 96, 96}, 0, 0.25}};
  const auto back = parse_detections(format_detections(dets, 96, 96), 96, 96, "d.txt");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].class_id, 1);
  EXPECT_NEAR(back[0].score, 0.875, 1e-6);
  EXPECT_NEAR(back[0].box.y2, 50, 1e-3);
  EXPECT_THROW(parse_detections("0 0.5 0.5 0.5 0.1\n", 96, 96, "d.txt"), ParseError);
}

}  // namespace
}  // namespace ssda
