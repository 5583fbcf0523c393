#pragma once

#include <string>
#include <vector>

namespace dhde::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // scatter points instead of a polyline
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width = 800;
  int height = 420;
};

// SVG 1.1 document with axes, tick labels and a legend.
std::string render(const Chart& chart);

}  // namespace dhde::svg
