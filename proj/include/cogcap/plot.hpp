#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cogcap {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Static line chart as standalone SVG. Non-finite points are skipped.
void write_svg_plot(std::ostream& out, const PlotSpec& spec);

}  // namespace cogcap
