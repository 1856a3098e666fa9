#pragma once

#include <string>
#include <vector>

namespace qfel::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
};

/// Polylines with axes, ticks and a legend. Non-finite points (and
/// nonpositive ones on a log axis) break the line.
std::string render_svg(const Plot& plot);

}  // namespace qfel::cli
