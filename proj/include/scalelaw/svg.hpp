//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace scalelaw {

struct SvgSeries {
  enum class Style { kPoints, kLine, kDashed };

  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  Style style = Style::kPoints;
  std::string color = "#1f77b4";
};

/// Minimal x-y chart with a log or linear x axis. Output depends only on the
/// inputs, so identical data gives identical bytes.
struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  // Axis ranges; derived from the data when unset.
  std::optional<std::pair<double, double>> x_range;
  std::optional<std::pair<double, double>> y_range;
  std::vector<SvgSeries> series;
  // Shaded x interval, e.g. the holdout region.
  std::optional<std::pair<double, double>> shade_x;
  std::string shade_label;
  // Vertical markers with a caption each.
  std::vector<std::pair<double, std::string>> vlines;
  // Horizontal reference lines.
  std::vector<double> hlines;

  std::string render(int width = 720, int height = 460) const;
};

// Series palette, cycled by index.
const std::string &svg_color(std::size_t i);

}  // namespace scalelaw
