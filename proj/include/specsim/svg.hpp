#pragma once

#include <string>
#include <utility>
#include <vector>

namespace specsim {

struct SvgOptions {
  int width = 880;
  int height = 520;
  bool timestamp = true;  // emitted as a comment; suppressible for byte-level diffs
  std::string title;
};

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Polyline chart, one colored path per series, auto-scaled axes with ticks.
void write_svg_lines(const std::string& path, const std::vector<SvgSeries>& series,
                     const SvgOptions& opt = {});

// Dense grid colored by value. rows x cols values in row-major order; the
// colormap is the documented blue->white->red diverging ramp anchored at the
// value range.
void write_svg_heatmap(const std::string& path, const std::vector<double>& row_coords,
                       const std::vector<double>& col_coords, const std::vector<double>& values,
                       const SvgOptions& opt = {});

// Point cloud, one color per group; an optional per-group mean polyline.
void write_svg_scatter(const std::string& path, const std::vector<SvgSeries>& groups,
                       bool draw_group_means, const SvgOptions& opt = {});

}  // namespace specsim
