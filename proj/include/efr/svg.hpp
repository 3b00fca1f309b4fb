#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "efr/csv.hpp"
#include "efr/peaks.hpp"
#include "efr/types.hpp"

namespace efr {

// Self-contained SVG emitters for the optional --emit-plots output. All
// quantitative results live in the CSV/JSON files; these are quick-look
// renderings only.

namespace svg_detail {

inline std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(2);
  ss << std::fixed << v;
  return ss.str();
}

inline const char* series_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[i % 8];
}

struct Frame {
  double width{800}, height{300};
  double left{60}, right{20}, top{20}, bottom{40};
  double x_min{0}, x_max{1}, y_min{0}, y_max{1};

  double px(double x) const {
    return left + (x - x_min) / (x_max - x_min) * (width - left - right);
  }
  double py(double y) const {
    return height - bottom - (y - y_min) / (y_max - y_min) * (height - top - bottom);
  }
};

inline void axes(std::ostringstream& out, const Frame& f, const std::string& x_label,
                 const std::string& y_label) {
  out << "<rect x='" << fmt(f.left) << "' y='" << fmt(f.top) << "' width='"
      << fmt(f.width - f.left - f.right) << "' height='" << fmt(f.height - f.top - f.bottom)
      << "' fill='none' stroke='#333'/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x_min + (f.x_max - f.x_min) * i / 4.0;
    const double yv = f.y_min + (f.y_max - f.y_min) * i / 4.0;
    out << "<text x='" << fmt(f.px(xv)) << "' y='" << fmt(f.height - f.bottom + 16)
        << "' font-size='10' text-anchor='middle'>" << fmt(xv) << "</text>\n";
    out << "<text x='" << fmt(f.left - 6) << "' y='" << fmt(f.py(yv) + 3)
        << "' font-size='10' text-anchor='end'>" << fmt(yv) << "</text>\n";
  }
  out << "<text x='" << fmt((f.left + f.width - f.right) / 2) << "' y='" << fmt(f.height - 6)
      << "' font-size='11' text-anchor='middle'>" << x_label << "</text>\n";
  out << "<text x='14' y='" << fmt((f.top + f.height - f.bottom) / 2)
      << "' font-size='11' text-anchor='middle' transform='rotate(-90 14 "
      << fmt((f.top + f.height - f.bottom) / 2) << ")'>" << y_label << "</text>\n";
}

}  // namespace svg_detail

// Overlayed line chart of one or more frequency series (invalid bins leave
// gaps in the polyline).
inline std::string line_chart_svg(const std::vector<std::pair<std::string, const FrequencySeries*>>& series,
                                  const std::string& title, const std::string& x_label,
                                  const std::string& y_label) {
  using namespace svg_detail;
  Frame f;
  f.x_min = std::numeric_limits<double>::infinity();
  f.x_max = -f.x_min;
  f.y_min = 0.0;
  f.y_max = -std::numeric_limits<double>::infinity();
  for (const auto& [name, s] : series) {
    for (std::size_t k = 0; k < s->size(); ++k) {
      if (!s->valid.empty() && !s->valid[k]) continue;
      f.x_min = std::min(f.x_min, s->bin_freqs_hz[k]);
      f.x_max = std::max(f.x_max, s->bin_freqs_hz[k]);
      f.y_max = std::max(f.y_max, s->values[k]);
    }
  }
  if (!(f.y_max > 0.0)) f.y_max = 1.0;
  if (!(f.x_max > f.x_min)) {
    f.x_min = 0.0;
    f.x_max = 1.0;
  }
  f.y_max *= 1.05;

  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << f.width << "' height='" << f.height
      << "'>\n<text x='" << fmt(f.width / 2) << "' y='14' font-size='12' text-anchor='middle'>"
      << title << "</text>\n";
  axes(out, f, x_label, y_label);

  std::size_t idx = 0;
  for (const auto& [name, s] : series) {
    out << "<path fill='none' stroke='" << series_color(idx) << "' stroke-width='1.2' d='";
    bool pen_down = false;
    for (std::size_t k = 0; k < s->size(); ++k) {
      if (!s->valid.empty() && !s->valid[k]) {
        pen_down = false;
        continue;
      }
      out << (pen_down ? 'L' : 'M') << fmt(f.px(s->bin_freqs_hz[k])) << ' '
          << fmt(f.py(s->values[k])) << ' ';
      pen_down = true;
    }
    out << "'/>\n";
    out << "<text x='" << fmt(f.width - f.right - 4) << "' y='" << fmt(f.top + 12 * (idx + 1))
        << "' font-size='10' text-anchor='end' fill='" << series_color(idx) << "'>" << name
        << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
  return out.str();
}

// Waveform over time (downsampled to at most max_points line segments).
inline std::string waveform_svg(const SignalRecord& signal, const std::string& title,
                                std::size_t max_points = 2000) {
  using namespace svg_detail;
  Frame f;
  f.x_min = 0.0;
  f.x_max = signal.duration_s();
  f.y_min = 0.0;
  f.y_max = 0.0;
  for (double v : signal.samples) {
    f.y_min = std::min(f.y_min, v);
    f.y_max = std::max(f.y_max, v);
  }
  if (f.y_max == f.y_min) f.y_max = f.y_min + 1.0;

  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << f.width << "' height='" << f.height
      << "'>\n<text x='" << fmt(f.width / 2) << "' y='14' font-size='12' text-anchor='middle'>"
      << title << "</text>\n";
  axes(out, f, "time [s]", signal.label);

  const std::size_t step = std::max<std::size_t>(1, signal.samples.size() / max_points);
  out << "<path fill='none' stroke='#1f77b4' stroke-width='0.8' d='";
  for (std::size_t i = 0; i < signal.samples.size(); i += step) {
    const double t = static_cast<double>(i) / signal.sample_rate_hz;
    out << (i == 0 ? 'M' : 'L') << fmt(f.px(t)) << ' ' << fmt(f.py(signal.samples[i])) << ' ';
  }
  out << "'/>\n</svg>\n";
  return out.str();
}

// Time-frequency intensity grid; NaN cells are left blank. Values are mapped
// onto a blue-white-red ramp between the 5th and 95th percentile.
inline std::string heatmap_svg(const std::vector<double>& grid, std::size_t frames, std::size_t bins,
                               const std::vector<double>& frame_times_s,
                               const std::vector<double>& bin_freqs_hz, const std::string& title,
                               std::size_t max_columns = 240) {
  using namespace svg_detail;
  std::vector<double> finite;
  finite.reserve(grid.size());
  for (double v : grid)
    if (!std::isnan(v)) finite.push_back(v);
  double lo = 0.0, hi = 1.0;
  if (!finite.empty()) {
    std::sort(finite.begin(), finite.end());
    lo = finite[static_cast<std::size_t>(0.05 * static_cast<double>(finite.size() - 1))];
    hi = finite[static_cast<std::size_t>(0.95 * static_cast<double>(finite.size() - 1))];
    if (hi <= lo) hi = lo + 1.0;
  }

  const std::size_t col_stride = std::max<std::size_t>(1, frames / max_columns);
  const std::size_t cols = (frames + col_stride - 1) / col_stride;

  Frame f;
  f.width = 860;
  f.height = 360;
  f.x_min = frame_times_s.front();
  f.x_max = frame_times_s.back();
  f.y_min = bin_freqs_hz.front();
  f.y_max = bin_freqs_hz.back();

  const double cell_w = (f.width - f.left - f.right) / static_cast<double>(cols);
  const double cell_h = (f.height - f.top - f.bottom) / static_cast<double>(bins);

  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << f.width << "' height='" << f.height
      << "'>\n<text x='" << fmt(f.width / 2) << "' y='14' font-size='12' text-anchor='middle'>"
      << title << "</text>\n";

  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t k = 0; k < bins; ++k) {
      // Average the frames this column covers.
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t m = c * col_stride; m < std::min(frames, (c + 1) * col_stride); ++m) {
        const double v = grid[m * bins + k];
        if (std::isnan(v)) continue;
        sum += v;
        ++count;
      }
      if (count == 0) continue;
      double t = (sum / static_cast<double>(count) - lo) / (hi - lo);
      t = std::clamp(t, 0.0, 1.0);
      const int r = static_cast<int>(std::lround(255.0 * t));
      const int b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      const int g = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(2.0 * t - 1.0))));
      out << "<rect x='" << fmt(f.left + static_cast<double>(c) * cell_w) << "' y='"
          << fmt(f.height - f.bottom - static_cast<double>(k + 1) * cell_h) << "' width='"
          << fmt(cell_w + 0.5) << "' height='" << fmt(cell_h + 0.5) << "' fill='rgb(" << r << ','
          << g << ',' << b << ")'/>\n";
    }
  }
  axes(out, f, "time [s]", "frequency [Hz]");
  out << "</svg>\n";
  return out.str();
}

// One bar chart per label, stacked vertically.
inline std::string histogram_svg(const PeakHistogram& hist, const std::string& title) {
  using namespace svg_detail;
  const double panel_h = 120.0;
  const double width = 860.0;
  const double height = 30.0 + panel_h * static_cast<double>(hist.counts.size());

  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "'>\n<text x='" << fmt(width / 2) << "' y='14' font-size='12' text-anchor='middle'>"
      << title << "</text>\n";

  std::size_t idx = 0;
  for (const auto& [label, counts] : hist.counts) {
    const double top = 24.0 + panel_h * static_cast<double>(idx);
    std::int64_t max_count = 1;
    for (auto c : counts) max_count = std::max(max_count, c);
    const double left = 60.0, right = 20.0, bar_area_h = panel_h - 34.0;
    const double bar_w = (width - left - right) / static_cast<double>(counts.size());
    out << "<text x='" << fmt(left) << "' y='" << fmt(top + 10) << "' font-size='11'>" << label
        << "</text>\n";
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] == 0) continue;
      const double h = bar_area_h * static_cast<double>(counts[i]) / static_cast<double>(max_count);
      out << "<rect x='" << fmt(left + static_cast<double>(i) * bar_w) << "' y='"
          << fmt(top + 14 + bar_area_h - h) << "' width='" << fmt(std::max(bar_w - 0.4, 0.6))
          << "' height='" << fmt(h) << "' fill='" << series_color(idx) << "'/>\n";
    }
    out << "<line x1='" << fmt(left) << "' y1='" << fmt(top + 14 + bar_area_h) << "' x2='"
        << fmt(width - right) << "' y2='" << fmt(top + 14 + bar_area_h)
        << "' stroke='#333' stroke-width='0.6'/>\n";
    for (int fl = 0; fl <= 100; fl += 20) {
      const double x = left + (width - left - right) * fl / 100.0;
      out << "<text x='" << fmt(x) << "' y='" << fmt(top + 14 + bar_area_h + 11)
          << "' font-size='9' text-anchor='middle'>" << fl << "</text>\n";
    }
    ++idx;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace efr
