#include "plot_svg.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <fmt/format.h>

namespace cohaptics::plots {
namespace {

constexpr double kWidth = 640, kHeight = 400, kMargin = 56;
constexpr const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

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
  double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series,
                       const std::vector<double>& h_lines) {
  Range rx, ry;
  for (const auto& s : series) {
    for (double v : s.x) rx.add(v);
    for (double v : s.y) ry.add(v);
  }
  for (double v : h_lines) ry.add(v);
  rx.pad();
  ry.pad();
  const auto px = [&](double v) { return rx.map(v, kMargin, kWidth - kMargin / 2); };
  const auto py = [&](double v) { return ry.map(v, kHeight - kMargin, kMargin / 2); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kWidth, kHeight);
  svg += fmt::format("<text x=\"{}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     kWidth / 2, escape(title));
  svg += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>\n", kMargin,
      kMargin / 2, kWidth - 1.5 * kMargin, kHeight - 1.5 * kMargin);
  for (int i = 0; i <= 4; ++i) {
    const double vx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
    const double vy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", px(vx),
                       kHeight - kMargin + 16, vx);
    svg += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", kMargin - 4,
                       py(vy) + 4, vy);
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kWidth / 2,
                     kHeight - 12, escape(x_label));
  svg += fmt::format(
      "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
      kHeight / 2, kHeight / 2, escape(y_label));
  for (double v : h_lines) {
    svg += fmt::format(
        "<line x1=\"{}\" x2=\"{}\" y1=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#aaa\" stroke-dasharray=\"4 3\"/>\n",
        kMargin, kWidth - kMargin / 2, py(v), py(v));
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kColours[k % std::size(kColours)];
    std::string pts;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    const std::size_t stride = std::max<std::size_t>(1, n / 2000);
    for (std::size_t i = 0; i < n; i += stride) pts += fmt::format("{:.1f},{:.1f} ", px(s.x[i]), py(s.y[i]));
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                       colour, pts);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kMargin + 8,
                       kMargin / 2 + 16 * (k + 1), colour, escape(s.label));
  }
  svg += "</svg>\n";
  return svg;
}

Series distance_series(const std::string& label, const SimTrace& trace) {
  Series s{label, {}, {}};
  for (const auto& r : trace) {
    s.x.push_back(r.t);
    s.y.push_back(r.d_ro);
  }
  return s;
}

Series path_series(const std::string& label, const SimTrace& trace) {
  Series s{label, {}, {}};
  for (const auto& r : trace) {
    s.x.push_back(r.x_r.y());
    s.y.push_back(r.x_r.x());
  }
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error("cannot write '" + path + "'");
}

}  // namespace cohaptics::plots
