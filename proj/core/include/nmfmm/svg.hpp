#pragma once

#include <string>
#include <vector>

namespace nmfmm {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "time (s)";
  std::string y_label = "objective";
  bool log_y = true;
  int width = 720;
  int height = 480;
};

/// Self-contained SVG line chart. Non-positive y values are dropped on a log axis.
std::string line_plot_svg(const std::vector<PlotSeries>& series, const PlotOptions& options);

}  // namespace nmfmm
