#include "radpair/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "radpair/errors.hpp"

namespace radpair::io {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

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

}  // namespace

std::string svg_line_plot(std::span<const double> x, std::span<const double> y,
                          const std::string& x_label, const std::string& y_label,
                          const std::string& title) {
  if (x.size() != y.size()) throw ShapeError("x and y differ in length");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isfinite(x[i]) && std::isfinite(y[i])) pts.emplace_back(x[i], y[i]);
  }
  if (pts.empty()) throw EmptyResult("nothing to plot");

  double x0 = pts.front().first, x1 = x0, y0 = pts.front().second, y1 = y0;
  for (const auto& [px, py] : pts) {
    x0 = std::min(x0, px);
    x1 = std::max(x1, px);
    y0 = std::min(y0, py);
    y1 = std::max(y1, py);
  }
  if (x1 == x0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 == y0) {
    const double pad = y0 == 0.0 ? 1.0 : 0.1 * std::abs(y0);
    y0 -= pad;
    y1 += pad;
  }
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * pw; };
  auto sy = [&](double v) { return kTop + (1.0 - (v - y0) / (y1 - y0)) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
       num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" fill=\"white\"/>\n";
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
       "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
       escape(title) + "</text>\n";
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 16) +
       "\" text-anchor=\"middle\" font-size=\"13\">" + escape(x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" font-size=\"13\" " +
       "transform=\"rotate(-90 18 " + num(kTop + ph / 2) + ")\">" + escape(y_label) + "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    s += "<text x=\"" + num(sx(fx)) + "\" y=\"" + num(kTop + ph + 18) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + num(fx) + "</text>\n";
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(sy(fy) + 4) +
         "\" text-anchor=\"end\" font-size=\"11\">" + num(fy) + "</text>\n";
  }
  if (pts.size() == 1) {
    s += "<circle cx=\"" + num(sx(pts[0].first)) + "\" cy=\"" + num(sy(pts[0].second)) +
         "\" r=\"4\" fill=\"steelblue\"/>\n";
  } else {
    s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) s += " ";
      s += num(sx(pts[i].first)) + "," + num(sy(pts[i].second));
    }
    s += "\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string emit_svg_plot(const SweepResult& r) {
  if (r.size() == 0) throw EmptyResult("empty sweep");
  if (!r.contrast.empty()) {
    std::string title = "ODMR";
    if (auto it = r.metadata.find("b0_mT"); it != r.metadata.end()) title += " at " + it->second + " mT";
    return svg_line_plot(r.axis_values, r.contrast, "frequency (MHz)", "contrast", title);
  }
  return svg_line_plot(r.axis_values, r.fluorescence, "B0 (mT)", "fluorescence", "MFE");
}

std::string emit_svg_plot(const Spectrum& spectrum, const std::string& title) {
  if (spectrum.size() == 0) throw EmptyResult("empty spectrum");
  return svg_line_plot(spectrum.frequency, spectrum.contrast, "frequency (MHz)", "contrast", title);
}

}  // namespace radpair::io
