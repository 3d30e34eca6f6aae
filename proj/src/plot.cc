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

#include "ssda/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ssda/config.h"
#include "ssda/errors.h"
#include "ssda/trainer.h"

namespace fs = std::filesystem;

namespace ssda {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool any = false;
  for (const Series& s : spec.series) {
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!any) {
        x_min = x_max = s.x[i];
        y_min = y_max = s.y[i];
        any = true;
      }
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (!spec.x_ticks.empty()) {
    x_min = 0;
    x_max = std::max<double>(1, spec.x_ticks.size() - 1);
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) {
    y_max += 0.5;
    y_min -= 0.5;
  }
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;
  auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
  auto sy = [&](double y) { return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(spec.title) << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\""
    << ph << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double v = y_min + (y_max - y_min) * i / 5.0;
    o << "<line x1=\"" << kLeft - 4 << "\" x2=\"" << kLeft << "\" y1=\"" << num(sy(v))
      << "\" y2=\"" << num(sy(v)) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(sy(v) + 4)
      << "\" text-anchor=\"end\">" << tick_label(v) << "</text>\n";
  }
  if (!spec.x_ticks.empty()) {
    for (size_t i = 0; i < spec.x_ticks.size(); ++i) {
      o << "<text x=\"" << num(sx(i)) << "\" y=\"" << kTop + ph + 16
        << "\" text-anchor=\"middle\">" << escape(spec.x_ticks[i]) << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 5; ++i) {
      const double v = x_min + (x_max - x_min) * i / 5.0;
      o << "<text x=\"" << num(sx(v)) << "\" y=\"" << kTop + ph + 16
        << "\" text-anchor=\"middle\">" << tick_label(v) << "</text>\n";
    }
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 18 << "\" text-anchor=\"middle\">"
    << escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << kTop + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

  for (size_t k = 0; k < spec.series.size(); ++k) {
    const Series& s = spec.series[k];
    const char* color = kPalette[k % (sizeof(kPalette) / sizeof(kPalette[0]))];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (i) o << ' ';
      o << num(sx(s.x[i])) << ',' << num(sy(s.y[i]));
    }
    o << "\"/>\n";
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      o << "<circle cx=\"" << num(sx(s.x[i])) << "\" cy=\"" << num(sy(s.y[i]))
        << "\" r=\"2.5\" fill=\"" << color << "\"/>";
    }
    o << "\n";
    const double ly = kTop + 10 + 18 * k;
    o << "<line x1=\"" << kLeft + pw + 12 << "\" x2=\"" << kLeft + pw + 32 << "\" y1=\"" << ly
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
    o << "<text class=\"legend\" x=\"" << kLeft + pw + 38 << "\" y=\"" << ly + 4 << "\">"
      << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw ConfigError(source + " has no column '" + name + "'");
  }
  const size_t idx = static_cast<size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[idx]);
  return out;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  CsvTable table;
  table.source = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  for (const std::string& h : split(line, ',')) table.header.push_back(trim(h));
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != table.header.size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (const std::string& c : cells) row.push_back(parse_double(table.header[row.size()], c));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<fs::path> run_plot(const std::vector<fs::path>& runs, const fs::path& out_dir) {
  if (runs.empty()) throw ConfigError("plot needs at least one run directory");
  struct RunCurves {
    std::string name;
    std::vector<double> epoch, box, cls, obj, map50;
  };
  std::vector<RunCurves> curves;
  for (const fs::path& run : runs) {
    const fs::path losses = run / "losses.csv";
    if (!fs::exists(losses)) throw IoError(run.string() + " has no losses.csv");
    const CsvTable loss_table = read_csv(losses);
    for (const std::string& col : split(kLossLogHeader, ',')) loss_table.column(col);
    const CsvTable eval = read_csv(run / "eval.csv");
    RunCurves c;
    c.name = run.filename().empty() ? run.parent_path().filename().string()
                                    : run.filename().string();
    c.epoch = eval.column("epoch");
    c.box = eval.column("box");
    c.cls = eval.column("cls");
    c.obj = eval.column("obj");
    c.map50 = eval.column("mAP50");
    curves.push_back(std::move(c));
  }

  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  auto emit = [&](const std::string& file, const std::string& title, const std::string& y_label,
                  std::vector<double> RunCurves::*field) {
    PlotSpec spec;
    spec.title = title;
    spec.x_label = "epoch";
    spec.y_label = y_label;
    for (const RunCurves& c : curves) spec.series.push_back({c.name, c.epoch, c.*field});
    const fs::path path = out_dir / file;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << render_svg(spec);
    written.push_back(path);
  };
  emit("loss_box.svg", "L_box on target test split", "box loss", &RunCurves::box);
  emit("loss_cls.svg", "L_cls on target test split", "cls loss", &RunCurves::cls);
  emit("loss_obj.svg", "L_obj on target test split", "obj loss", &RunCurves::obj);
  emit("map.svg", "Target mAP@0.5", "mAP50", &RunCurves::map50);
  return written;
}

}  // namespace ssda
