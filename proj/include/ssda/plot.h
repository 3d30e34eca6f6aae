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

#ifndef SSDA_PLOT_H_
#define SSDA_PLOT_H_

#include <filesystem>
#include <string>
#include <vector>

namespace ssda {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  // When set, x values are indices into these labels (categorical axis).
  std::vector<std::string> x_ticks;
};

std::string render_svg(const PlotSpec& spec);

// Numeric CSV with a header row.
struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Throws ConfigError naming the column when it is absent.
  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

// Writes loss_box.svg, loss_cls.svg, loss_obj.svg (held-out target-split
// losses per epoch) and map.svg (mAP50 per epoch), one curve per run.
std::vector<std::filesystem::path> run_plot(const std::vector<std::filesystem::path>& runs,
                                            const std::filesystem::path& out_dir);

}  // namespace ssda

#endif  // SSDA_PLOT_H_
