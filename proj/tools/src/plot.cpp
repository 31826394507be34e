#include "freegeom_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace freegeom::cli {
namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<')
      o += "&lt;";
    else if (c == '>')
      o += "&gt;";
    else if (c == '&')
      o += "&amp;";
    else
      o += c;
  }
  return o;
}

struct Curve {
  std::string label;
  std::vector<double> x, y;
};

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double map(double v) const { return log ? std::log10(v) : v; }
  double unit(double v) const { return (map(v) - lo) / (hi - lo); }
};

Axis make_axis(const std::vector<double>& values, bool log) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    lo = std::min(lo, a.map(v));
    hi = std::max(hi, a.map(v));
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  a.lo = lo - pad;
  a.hi = hi + pad;
  return a;
}

}  // namespace

std::string render_svg(const json& report) {
  if (!report.is_object() || !report.contains("series") || !report["series"].is_object())
    throw PlotError("report has no plottable series");
  const json& s = report["series"];
  const bool log_x = s.value("log_x", false), log_y = s.value("log_y", false);
  std::vector<Curve> curves;
  std::vector<double> xs, ys;
  if (s.contains("curves") && s["curves"].is_array())
    for (const json& c : s["curves"]) {
      if (!c.contains("x") || !c.contains("y") || !c["x"].is_array() || !c["y"].is_array()) continue;
      Curve cv;
      cv.label = c.value("label", "");
      const size_t len = std::min(c["x"].size(), c["y"].size());
      for (size_t i = 0; i < len; ++i) {
        if (!c["x"][i].is_number() || !c["y"][i].is_number()) continue;
        const double x = c["x"][i], y = c["y"][i];
        if (!std::isfinite(x) || !std::isfinite(y) || (log_x && x <= 0.0) || (log_y && y <= 0.0)) continue;
        cv.x.push_back(x);
        cv.y.push_back(y);
      }
      if (cv.x.empty()) continue;
      xs.insert(xs.end(), cv.x.begin(), cv.x.end());
      ys.insert(ys.end(), cv.y.begin(), cv.y.end());
      curves.push_back(std::move(cv));
    }
  if (curves.empty()) throw PlotError("report series has no finite points");

  const Axis ax = make_axis(xs, log_x), ay = make_axis(ys, log_y);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + ax.unit(x) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - ay.unit(y)) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(s.value("title", "")) + "</text>\n";
  o += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  // Five ticks per axis, in mapped coordinates.
  for (int i = 0; i <= 4; ++i) {
    const double fx = i / 4.0;
    const double vx = ax.lo + fx * (ax.hi - ax.lo), vy = ay.lo + fx * (ay.hi - ay.lo);
    const double tx = kLeft + fx * pw, ty = kTop + (1.0 - fx) * ph;
    o += "<line x1=\"" + num(tx) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(tx) + "\" y2=\"" +
         num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + num(tx) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
         label(log_x ? std::pow(10.0, vx) : vx) + "</text>\n";
    o += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(ty) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(ty) +
         "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(ty + 4) + "\" text-anchor=\"end\">" +
         label(log_y ? std::pow(10.0, vy) : vy) + "</text>\n";
  }
  o += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 18) + "\" text-anchor=\"middle\">" +
       escape(s.value("x_label", "")) + (log_x ? " (log)" : "") + "</text>\n";
  o += "<text x=\"18\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       num(kTop + ph / 2) + ")\">" + escape(s.value("y_label", "")) + (log_y ? " (log)" : "") + "</text>\n";

  for (size_t c = 0; c < curves.size(); ++c) {
    const char* color = kColors[c % (sizeof kColors / sizeof kColors[0])];
    const Curve& cv = curves[c];
    std::string pts;
    for (size_t i = 0; i < cv.x.size(); ++i) pts += (i ? " " : "") + num(px(cv.x[i])) + "," + num(py(cv.y[i]));
    if (cv.x.size() > 1)
      o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"/>\n";
    for (size_t i = 0; i < cv.x.size(); ++i)
      o += "<circle cx=\"" + num(px(cv.x[i])) + "\" cy=\"" + num(py(cv.y[i])) + "\" r=\"2.5\" fill=\"" + color +
           "\"/>\n";
    const double ly = kTop + 12 + 18.0 * static_cast<double>(c);
    o += "<line x1=\"" + num(kLeft + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(kLeft + pw + 32) +
         "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + num(kLeft + pw + 38) + "\" y=\"" + num(ly + 4) + "\">" + escape(cv.label) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace freegeom::cli
