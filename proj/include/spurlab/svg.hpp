#pragma once

#include <string>
#include <vector>

namespace spurlab::svg {

// Minimal self-contained SVG line charts: axes, ticks, series, legend. No
// timestamps or other run-dependent metadata, so identical data produces
// byte-identical files.

struct Series {
  std::string label;
  std::string color = "#1f6fb2";
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

// Renders charts stacked vertically into one SVG document.
std::string render(const std::vector<Chart>& charts, int width = 720,
                   int height_per_chart = 300);

}  // namespace spurlab::svg
