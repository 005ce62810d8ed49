//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#include "scalelaw/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "scalelaw/error.hpp"

namespace scalelaw {

namespace {
  std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
  }

  std::string px(double v) { return fmt("%.2f", v); }

  std::string escape(const std::string &s) {
    std::string out;
    for (char c: s) {
      switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
      }
    }
    return out;
  }

  std::pair<double, double> data_range(const std::vector<SvgSeries> &series, bool use_x,
                                       bool positive_only) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto &s: series)
      for (double v: use_x ? s.x : s.y) {
        if (!std::isfinite(v) || (positive_only && v <= 0))
          continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    if (!std::isfinite(lo))
      return positive_only ? std::pair { 1.0, 10.0 } : std::pair { 0.0, 1.0 };
    if (hi == lo) {
      if (positive_only)
        return { lo / 2, hi * 2 };
      return { lo - 0.5, hi + 0.5 };
    }
    return { lo, hi };
  }

  std::vector<double> linear_ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m: { 1.0, 2.0, 2.5, 5.0, 10.0 })
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
      t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
  }
}  // namespace

const std::string &svg_color(std::size_t i) {
  static const std::array<std::string, 8> palette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#e377c2", "#17becf",
  };
  return palette[i % palette.size()];
}

std::string SvgPlot::render(int width, int height) const {
  if (width < 200 || height < 150)
    throw InvalidArgument("svg: canvas too small");
  const double left = 72, right = 170, top = 40, bottom = 56;
  const double pw = width - left - right, ph = height - top - bottom;

  auto [x0, x1] = x_range ? *x_range : data_range(series, true, log_x);
  if (!x_range && log_x) {
    x0 = std::pow(10.0, std::floor(std::log10(x0)));
    x1 = std::pow(10.0, std::ceil(std::log10(x1)));
  }
  auto [y0, y1] = y_range ? *y_range : data_range(series, false, false);
  if (log_x && !(x0 > 0))
    throw InvalidArgument("svg: log axis needs positive range");

  auto tx = [&](double x) {
    const double f = log_x ? (std::log10(x) - std::log10(x0))
                                 / (std::log10(x1) - std::log10(x0))
                           : (x - x0) / (x1 - x0);
    return left + f * pw;
  };
  auto ty = [&](double y) { return top + (1 - (y - y0) / (y1 - y0)) * ph; };
  auto inside = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!log_x || x > 0) && x >= x0
           && x <= x1 && y >= y0 && y <= y1;
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" viewBox=\"0 0 " << width << ' ' << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    os << "<text x=\"" << px(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" "
       << "font-size=\"15\">" << escape(title) << "</text>\n";

  if (shade_x) {
    const double a = tx(std::clamp(shade_x->first, x0, x1));
    const double b = tx(std::clamp(shade_x->second, x0, x1));
    if (b > a) {
      os << "<rect x=\"" << px(a) << "\" y=\"" << px(top) << "\" width=\"" << px(b - a)
         << "\" height=\"" << px(ph) << "\" fill=\"#999999\" fill-opacity=\"0.18\"/>\n";
      if (!shade_label.empty())
        os << "<text x=\"" << px(a + 4) << "\" y=\"" << px(top + 14)
           << "\" fill=\"#555555\">" << escape(shade_label) << "</text>\n";
    }
  }

  // Axes and ticks.
  os << "<g stroke=\"#333333\" fill=\"none\">\n";
  os << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(pw)
     << "\" height=\"" << px(ph) << "\"/>\n";
  os << "</g>\n<g fill=\"#333333\">\n";
  if (log_x) {
    for (double e = std::ceil(std::log10(x0) - 1e-9); e <= std::log10(x1) + 1e-9; e += 1) {
      const double x = tx(std::pow(10.0, e));
      os << "<line x1=\"" << px(x) << "\" y1=\"" << px(top + ph) << "\" x2=\"" << px(x)
         << "\" y2=\"" << px(top + ph + 5) << "\" stroke=\"#333333\"/>\n";
      os << "<text x=\"" << px(x) << "\" y=\"" << px(top + ph + 18)
         << "\" text-anchor=\"middle\">1e" << static_cast<int>(e) << "</text>\n";
    }
  } else {
    for (double v: linear_ticks(x0, x1)) {
      const double x = tx(v);
      os << "<line x1=\"" << px(x) << "\" y1=\"" << px(top + ph) << "\" x2=\"" << px(x)
         << "\" y2=\"" << px(top + ph + 5) << "\" stroke=\"#333333\"/>\n";
      os << "<text x=\"" << px(x) << "\" y=\"" << px(top + ph + 18)
         << "\" text-anchor=\"middle\">" << fmt("%g", v) << "</text>\n";
    }
  }
  for (double v: linear_ticks(y0, y1)) {
    const double y = ty(v);
    os << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(y) << "\" x2=\"" << px(left)
       << "\" y2=\"" << px(y) << "\" stroke=\"#333333\"/>\n";
    os << "<text x=\"" << px(left - 8) << "\" y=\"" << px(y + 4)
       << "\" text-anchor=\"end\">" << fmt("%g", v) << "</text>\n";
  }
  os << "<text x=\"" << px(left + pw / 2) << "\" y=\"" << px(height - 14.0)
     << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << px(top + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
  os << "</g>\n";

  for (double h: hlines)
    if (h >= y0 && h <= y1)
      os << "<line x1=\"" << px(left) << "\" y1=\"" << px(ty(h)) << "\" x2=\""
         << px(left + pw) << "\" y2=\"" << px(ty(h))
         << "\" stroke=\"#888888\" stroke-dasharray=\"2,3\"/>\n";
  for (const auto &[v, caption]: vlines) {
    if (!(v >= x0 && v <= x1))
      continue;
    const double x = tx(v);
    os << "<line x1=\"" << px(x) << "\" y1=\"" << px(top) << "\" x2=\"" << px(x)
       << "\" y2=\"" << px(top + ph) << "\" stroke=\"#000000\" stroke-dasharray=\"6,4\"/>\n";
    os << "<text x=\"" << px(x + 4) << "\" y=\"" << px(top + ph - 6) << "\">"
       << escape(caption) << "</text>\n";
  }

  for (const auto &s: series) {
    if (s.x.size() != s.y.size())
      throw InvalidArgument("svg: series '" + s.label + "' has mismatched x/y");
    if (s.style == SvgSeries::Style::kPoints) {
      os << "<g fill=\"" << s.color << "\" fill-opacity=\"0.75\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (inside(s.x[i], s.y[i]))
          os << "<circle cx=\"" << px(tx(s.x[i])) << "\" cy=\"" << px(ty(s.y[i]))
             << "\" r=\"3\"/>\n";
      os << "</g>\n";
      continue;
    }
    // Lines break at points outside the plotting area.
    std::string d;
    bool pen = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!inside(s.x[i], s.y[i])) {
        pen = false;
        continue;
      }
      d += (pen ? " L" : " M") + px(tx(s.x[i])) + ' ' + px(ty(s.y[i]));
      pen = true;
    }
    if (!d.empty())
      os << "<path d=\"" << d.substr(1) << "\" fill=\"none\" stroke=\"" << s.color
         << "\" stroke-width=\"2\""
         << (s.style == SvgSeries::Style::kDashed ? " stroke-dasharray=\"6,4\"" : "")
         << "/>\n";
  }

  // Legend.
  double ly = top + 8;
  for (const auto &s: series) {
    if (s.label.empty())
      continue;
    const double lx = left + pw + 14;
    if (s.style == SvgSeries::Style::kPoints)
      os << "<circle cx=\"" << px(lx + 8) << "\" cy=\"" << px(ly) << "\" r=\"3\" fill=\""
         << s.color << "\"/>\n";
    else
      os << "<line x1=\"" << px(lx) << "\" y1=\"" << px(ly) << "\" x2=\"" << px(lx + 16)
         << "\" y2=\"" << px(ly) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << px(lx + 22) << "\" y=\"" << px(ly + 4) << "\">"
       << escape(s.label) << "</text>\n";
    ly += 18;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace scalelaw
