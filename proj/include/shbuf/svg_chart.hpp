#pragma once

#include <string>
#include <utility>
#include <vector>

namespace shbuf {

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Self-contained SVG line plot with axes, ticks and a legend.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<ChartSeries>& series);

}  // namespace shbuf
