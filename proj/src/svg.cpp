#include "specsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace specsim {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"};
constexpr int kPaletteSize = 10;
constexpr int kMarginLeft = 64, kMarginRight = 20, kMarginTop = 40, kMarginBottom = 44;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void open_doc(std::ofstream& out, const SvgOptions& opt) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (opt.timestamp) {
    const std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "<!-- generated " << buf << " -->\n";
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" viewBox=\"0 0 " << opt.width << " " << opt.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    out << "<text x=\"" << opt.width / 2
        << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
        << opt.title << "</text>\n";
}

void draw_axes(std::ofstream& out, const SvgOptions& opt, const Range& xr, const Range& yr) {
  const int x0 = kMarginLeft, x1 = opt.width - kMarginRight;
  const int y0 = opt.height - kMarginBottom, y1 = kMarginTop;
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = xr.lo + (xr.hi - xr.lo) * t / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * t / 4.0;
    const double px = x0 + (x1 - x0) * t / 4.0;
    const double py = y0 - (y0 - y1) * t / 4.0;
    out << "<text x=\"" << num(px) << "\" y=\"" << y0 + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(fx)
        << "</text>\n"
        << "<text x=\"" << x0 - 6 << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(fy)
        << "</text>\n";
  }
}

double sx(double v, const Range& r, const SvgOptions& opt) {
  return kMarginLeft + (v - r.lo) / (r.hi - r.lo) * (opt.width - kMarginLeft - kMarginRight);
}
double sy(double v, const Range& r, const SvgOptions& opt) {
  return (opt.height - kMarginBottom) -
         (v - r.lo) / (r.hi - r.lo) * (opt.height - kMarginTop - kMarginBottom);
}

void legend(std::ofstream& out, const std::vector<SvgSeries>& series, const SvgOptions& opt) {
  int row = 0;
  for (std::size_t i = 0; i < series.size() && row < 12; ++i) {
    if (series[i].label.empty()) continue;
    const int y = kMarginTop + 14 * row++;
    out << "<rect x=\"" << opt.width - kMarginRight - 110 << "\" y=\"" << y - 8
        << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[i % kPaletteSize] << "\"/>\n"
        << "<text x=\"" << opt.width - kMarginRight - 96 << "\" y=\"" << y
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[i].label << "</text>\n";
  }
}

}  // namespace

void write_svg_lines(const std::string& path, const std::vector<SvgSeries>& series,
                     const SvgOptions& opt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_svg_lines: cannot open " + path);
  Range xr, yr;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xr.add(x);
      yr.add(y);
    }
  if (!std::isfinite(xr.lo)) {
    xr = {0.0, 1.0};
    yr = {0.0, 1.0};
  }
  xr.pad();
  yr.pad();
  open_doc(out, opt);
  draw_axes(out, opt, xr, yr);
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[i % kPaletteSize]
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[i].points)
      out << num(sx(x, xr, opt)) << "," << num(sy(y, yr, opt)) << " ";
    out << "\"/>\n";
  }
  legend(out, series, opt);
  out << "</svg>\n";
}

void write_svg_heatmap(const std::string& path, const std::vector<double>& row_coords,
                       const std::vector<double>& col_coords, const std::vector<double>& values,
                       const SvgOptions& opt) {
  const std::size_t rows = row_coords.size(), cols = col_coords.size();
  if (values.size() != rows * cols)
    throw std::invalid_argument("write_svg_heatmap: grid size mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_svg_heatmap: cannot open " + path);
  Range vr;
  for (double v : values) vr.add(v);
  vr.pad();
  Range xr, yr;
  for (double v : row_coords) xr.add(v);
  for (double v : col_coords) yr.add(v);
  xr.pad();
  yr.pad();
  open_doc(out, opt);
  draw_axes(out, opt, xr, yr);
  const double cw =
      static_cast<double>(opt.width - kMarginLeft - kMarginRight) / static_cast<double>(rows);
  const double ch = static_cast<double>(opt.height - kMarginTop - kMarginBottom) /
                    static_cast<double>(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      // diverging blue -> white -> red over [lo, hi]
      const double t = (values[r * cols + c] - vr.lo) / (vr.hi - vr.lo);
      int red, green, blue;
      if (t < 0.5) {
        const double u = t * 2.0;
        red = static_cast<int>(33 + u * (255 - 33));
        green = static_cast<int>(102 + u * (255 - 102));
        blue = static_cast<int>(172 + u * (255 - 172));
      } else {
        const double u = (t - 0.5) * 2.0;
        red = static_cast<int>(255 - u * (255 - 178));
        green = static_cast<int>(255 - u * (255 - 24));
        blue = static_cast<int>(255 - u * (255 - 43));
      }
      char color[8];
      std::snprintf(color, sizeof(color), "#%02x%02x%02x", red, green, blue);
      out << "<rect x=\"" << num(kMarginLeft + static_cast<double>(r) * cw) << "\" y=\""
          << num(kMarginTop + static_cast<double>(cols - 1 - c) * ch) << "\" width=\""
          << num(cw + 0.5) << "\" height=\"" << num(ch + 0.5) << "\" fill=\"" << color
          << "\"/>\n";
    }
  }
  out << "</svg>\n";
}

void write_svg_scatter(const std::string& path, const std::vector<SvgSeries>& groups,
                       bool draw_group_means, const SvgOptions& opt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_svg_scatter: cannot open " + path);
  Range xr, yr;
  for (const auto& g : groups)
    for (const auto& [x, y] : g.points) {
      xr.add(x);
      yr.add(y);
    }
  if (!std::isfinite(xr.lo)) {
    xr = {0.0, 1.0};
    yr = {0.0, 1.0};
  }
  xr.pad();
  yr.pad();
  open_doc(out, opt);
  draw_axes(out, opt, xr, yr);
  std::vector<std::pair<double, double>> means;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : groups[i].points) {
      out << "<circle cx=\"" << num(sx(x, xr, opt)) << "\" cy=\"" << num(sy(y, yr, opt))
          << "\" r=\"3\" fill=\"" << kPalette[i % kPaletteSize] << "\" fill-opacity=\"0.7\"/>\n";
      mx += x;
      my += y;
    }
    if (!groups[i].points.empty())
      means.emplace_back(mx / static_cast<double>(groups[i].points.size()),
                         my / static_cast<double>(groups[i].points.size()));
  }
  if (draw_group_means && means.size() > 1) {
    std::sort(means.begin(), means.end());
    out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"4 "
           "3\" points=\"";
    for (const auto& [x, y] : means)
      out << num(sx(x, xr, opt)) << "," << num(sy(y, yr, opt)) << " ";
    out << "\"/>\n";
  }
  legend(out, groups, opt);
  out << "</svg>\n";
}

}  // namespace specsim
