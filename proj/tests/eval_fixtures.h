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

// Random evaluation fixtures shared by the unit and acceptance tests.

#ifndef SSDA_TESTS_EVAL_FIXTURES_H_
#define SSDA_TESTS_EVAL_FIXTURES_H_

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.h"
#include "ssda/eval_metrics.h"

namespace ssda::fixtures {

struct EvalFixture {
  DetectionsById dets;
  GroundTruthById gts;
};

inline std::vector<oracle::OracleImage> ToOracle(const EvalFixture& f) {
  std::vector<oracle::OracleImage> out;
  for (const auto& [id, g] : f.gts) {
    oracle::OracleImage im;
    im.id = id;
    im.gts = g;
    auto it = f.dets.find(id);
    if (it != f.dets.end()) im.dets = it->second;
    out.push_back(im);
  }
  return out;
}

// Random fixture with distinct scores; detections jitter around gts or
// land anywhere.
inline EvalFixture RandomFixture(std::mt19937_64& rng, int max_images, int max_objects) {
  std::uniform_real_distribution<double> pos(0.0, 60.0), len(8.0, 30.0), jit(-4.0, 4.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int images = 1 + static_cast<int>(rng() % max_images);
  const int objects = 1 + static_cast<int>(rng() % max_objects);
  EvalFixture f;
  for (int i = 0; i < images; ++i) f.gts["im" + std::to_string(i)];
  for (int k = 0; k < objects; ++k) {
    const double x = pos(rng), y = pos(rng);
    f.gts["im" + std::to_string(rng() % images)].push_back(
        {{x, y, x + len(rng), y + len(rng)}, static_cast<int>(rng() % 2)});
  }
  std::set<double> used;
  auto score = [&] {
    double s;
    do s = std::round(unit(rng) * 1e6) / 1e6; while (!used.insert(s).second);
    return s;
  };
  for (const auto& [id, g] : f.gts) {
    for (const auto& b : g) {
      const int copies = static_cast<int>(rng() % 3);
      for (int c = 0; c < copies; ++c) {
        const BBox j{b.box.x1 + jit(rng), b.box.y1 + jit(rng), b.box.x2 + jit(rng),
                     b.box.y2 + jit(rng)};
        const int cls = unit(rng) < 0.85 ? b.class_id : 1 - b.class_id;
        f.dets[id].push_back({j, cls, score()});
      }
    }
    if (unit(rng) < 0.5) {
      const double x = pos(rng), y = pos(rng);
      f.dets[id].push_back({{x, y, x + len(rng), y + len(rng)}, static_cast<int>(rng() % 2),
                            score()});
    }
  }
  return f;
}

}  // namespace ssda::fixtures

#endif  // SSDA_TESTS_EVAL_FIXTURES_H_
