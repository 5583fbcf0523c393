#include "dhde/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dhde/error.hpp"
#include "dhde/text.hpp"

namespace dhde::svg {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return text::format_fixed(v, 2); }

// Round step of 1, 2 or 5 times a power of ten giving about `target` ticks.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

std::string tick_label(double v, double step) {
  const int decimals = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step)));
  return text::format_fixed(v, decimals);
}

}  // namespace

std::string render(const Chart& chart) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size()) throw UsageError("svg: series '" + s.name + "' has mismatched x and y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double left = 70, right = 20, top = 40, bottom = 55;
  const double w = chart.width - left - right;
  const double h = chart.height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * w; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * h; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << chart.width << "\" height=\""
    << chart.height << "\" viewBox=\"0 0 " << chart.width << ' ' << chart.height << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << chart.width << "\" height=\"" << chart.height << "\" fill=\"white\"/>\n"
    << "<text x=\"" << num(chart.width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"15\">" << escape(chart.title) << "</text>\n";

  o << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  const double xs = nice_step(x1 - x0, 8), ys = nice_step(y1 - y0, 6);
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
    o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(top + h) << "\" x2=\"" << num(px(t)) << "\" y2=\""
      << num(top + h + 4) << "\" stroke=\"#333\"/>\n"
      << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + h + 17) << "\" text-anchor=\"middle\">"
      << tick_label(t, xs) << "</text>\n";
  }
  for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
    o << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(left + w) << "\" y2=\""
      << num(py(t)) << "\" stroke=\"#e5e5e5\"/>\n"
      << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
      << tick_label(t, ys) << "</text>\n";
  }
  o << "<text x=\"" << num(left + w / 2) << "\" y=\"" << num(chart.height - 12.0) << "\" text-anchor=\"middle\">"
    << escape(chart.x_label) << "</text>\n"
    << "<text x=\"16\" y=\"" << num(top + h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << num(top + h / 2) << ")\">" << escape(chart.y_label) << "</text>\n"
    << "</g>\n"
    << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
    << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    if (s.markers) {
      o << "<g fill=\"" << colour << "\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"2.5\"/>\n";
      }
      o << "</g>\n";
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        o << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
        first = false;
      }
      o << "\"/>\n";
    }
    const double ly = top + 14 + 16 * static_cast<double>(k);
    o << "<rect x=\"" << num(left + w - 150) << "\" y=\"" << num(ly - 9) << "\" width=\"12\" height=\"12\" fill=\""
      << colour << "\"/>\n"
      << "<text x=\"" << num(left + w - 132) << "\" y=\"" << num(ly + 1) << "\" font-family=\"sans-serif\" "
      << "font-size=\"11\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace dhde::svg
