#include "spurlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace spurlab::svg {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    } else {
      const double m = 0.05 * (hi - lo);
      lo -= m;
      hi += m;
    }
  }
};

double transformed(double v, bool log_scale) {
  if (!log_scale) return v;
  if (v <= 0.0) throw std::invalid_argument("svg: log scale needs positive data");
  return std::log10(v);
}

void render_chart(std::ostringstream& os, const Chart& chart, int width,
                  int height, int y_offset) {
  const int ml = 70, mr = 20, mt = 34, mb = 44;
  const double px = ml, py = y_offset + mt;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;

  Range xr, yr;
  for (const auto& s : chart.series) {
    for (double v : s.x) xr.include(transformed(v, chart.log_x));
    for (double v : s.y) yr.include(transformed(v, chart.log_y));
  }
  if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo)) {
    xr = {0.0, 1.0};
    yr = {0.0, 1.0};
  }
  xr.pad();
  yr.pad();
  const auto X = [&](double v) {
    return px + (transformed(v, chart.log_x) - xr.lo) / (xr.hi - xr.lo) * pw;
  };
  const auto Y = [&](double v) {
    return py + ph - (transformed(v, chart.log_y) - yr.lo) / (yr.hi - yr.lo) * ph;
  };

  os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<text x=\"" << px << "\" y=\"" << y_offset + 18
     << "\" font-size=\"14\">" << chart.title << "</text>\n";
  // frame
  os << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << pw
     << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";
  // ticks: 5 per axis on the transformed scale
  for (int i = 0; i <= 4; ++i) {
    const double tx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double sx = px + pw * i / 4.0;
    const double label = chart.log_x ? std::pow(10.0, tx) : tx;
    os << "<line x1=\"" << sx << "\" y1=\"" << py + ph << "\" x2=\"" << sx
       << "\" y2=\"" << py + ph + 4 << "\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << sx << "\" y=\"" << py + ph + 18
       << "\" text-anchor=\"middle\">" << num(label) << "</text>\n";
    const double ty = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    const double sy = py + ph - ph * i / 4.0;
    const double ylabel = chart.log_y ? std::pow(10.0, ty) : ty;
    os << "<line x1=\"" << px - 4 << "\" y1=\"" << sy << "\" x2=\"" << px
       << "\" y2=\"" << sy << "\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << px - 8 << "\" y=\"" << sy + 4
       << "\" text-anchor=\"end\">" << num(ylabel) << "</text>\n";
  }
  os << "<text x=\"" << px + pw / 2 << "\" y=\"" << py + ph + 36
     << "\" text-anchor=\"middle\">" << chart.x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << py + ph / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << py + ph / 2
     << ")\">" << chart.y_label << "</text>\n";

  // series + legend
  double legend_x = px + 10;
  for (const auto& s : chart.series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << num(X(s.x[i])) << ',' << num(Y(s.y[i])) << ' ';
    os << "\"/>\n";
    os << "<line x1=\"" << legend_x << "\" y1=\"" << py + 12 << "\" x2=\""
       << legend_x + 18 << "\" y2=\"" << py + 12 << "\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << legend_x + 22 << "\" y=\"" << py + 16 << "\">"
       << s.label << "</text>\n";
    legend_x += 26 + 7.2 * s.label.size();
  }
  os << "</g>\n";
}

}  // namespace

std::string render(const std::vector<Chart>& charts, int width,
                   int height_per_chart) {
  std::ostringstream os;
  const int total = height_per_chart * static_cast<int>(charts.size());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << total << "\" viewBox=\"0 0 " << width << ' ' << total
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < charts.size(); ++i)
    render_chart(os, charts[i], width, height_per_chart,
                 static_cast<int>(i) * height_per_chart);
  os << "</svg>\n";
  return os.str();
}

}  // namespace spurlab::svg
