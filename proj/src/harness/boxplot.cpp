#include "rplace/error.hpp"
#include "rplace/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace rplace {

namespace {

constexpr double kFloorMm = 1e-3;  // values below this sit on the axis floor
constexpr double kPlotTop = 40.0;
constexpr double kPlotHeight = 360.0;
constexpr double kPlotLeft = 70.0;
constexpr double kSlot = 56.0;
constexpr double kBoxWidth = 28.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
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

struct LogAxis {
  int lo_decade;
  int hi_decade;

  double y(double meters) const {
    const double mm = std::max(meters * 1000.0, kFloorMm);
    const double t = (std::log10(mm) - lo_decade) / static_cast<double>(hi_decade - lo_decade);
    return kPlotTop + kPlotHeight * (1.0 - t);
  }
};

}  // namespace

std::string boxplot_svg(std::span<const BoxEntry> entries) {
  if (entries.empty()) throw Error(ErrorCode::EmptyInput, "box plot needs at least one summary");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& e : entries) {
    lo = std::min(lo, std::max(e.stats.min * 1000.0, kFloorMm));
    hi = std::max(hi, std::max(e.stats.max * 1000.0, kFloorMm));
  }
  LogAxis axis{static_cast<int>(std::floor(std::log10(lo))), static_cast<int>(std::ceil(std::log10(hi)))};
  if (axis.hi_decade <= axis.lo_decade) axis.hi_decade = axis.lo_decade + 1;

  const double width = kPlotLeft + kSlot * static_cast<double>(entries.size()) + 20.0;
  const double height = kPlotTop + kPlotHeight + 130.0;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
                    num(height) + "\" viewBox=\"0 0 " + num(width) + ' ' + num(height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"14\" y=\"" + num(kPlotTop + kPlotHeight / 2.0) + "\" transform=\"rotate(-90 14 " +
         num(kPlotTop + kPlotHeight / 2.0) +
         ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">offset d_xy [mm]</text>\n";

  svg += "<g class=\"axis\">\n";
  svg += "<line x1=\"" + num(kPlotLeft) + "\" y1=\"" + num(kPlotTop) + "\" x2=\"" + num(kPlotLeft) + "\" y2=\"" +
         num(kPlotTop + kPlotHeight) + "\" stroke=\"black\"/>\n";
  for (int d = axis.lo_decade; d <= axis.hi_decade; ++d) {
    const double y = axis.y(std::pow(10.0, d) / 1000.0);
    char label[32];
    std::snprintf(label, sizeof label, "1e%d", d);
    svg += "<line class=\"tick\" x1=\"" + num(kPlotLeft - 5.0) + "\" y1=\"" + num(y) + "\" x2=\"" + num(width - 20.0) +
           "\" y2=\"" + num(y) + "\" stroke=\"#cccccc\"/>\n";
    svg += "<text x=\"" + num(kPlotLeft - 8.0) + "\" y=\"" + num(y + 4.0) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + label + "</text>\n";
  }
  svg += "</g>\n";

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const auto& s = e.stats;
    const double cx = kPlotLeft + kSlot * (static_cast<double>(i) + 0.5);
    const double left = cx - kBoxWidth / 2.0;
    const double y_q1 = axis.y(s.q1);
    const double y_q3 = axis.y(s.q3);
    svg += "<g class=\"box-group\" data-experiment=\"" + escape(e.experiment) + "\" data-group=\"" +
           escape(e.group) + "\" data-phase=\"" + escape(e.phase) + "\">\n";
    svg += "<line class=\"whisker\" x1=\"" + num(cx) + "\" y1=\"" + num(axis.y(s.min)) + "\" x2=\"" + num(cx) +
           "\" y2=\"" + num(axis.y(s.max)) + "\" stroke=\"black\"/>\n";
    for (double v : {s.min, s.max}) {
      svg += "<line class=\"whisker-cap\" x1=\"" + num(cx - 6.0) + "\" y1=\"" + num(axis.y(v)) + "\" x2=\"" +
             num(cx + 6.0) + "\" y2=\"" + num(axis.y(v)) + "\" stroke=\"black\"/>\n";
    }
    svg += "<rect class=\"iqr\" x=\"" + num(left) + "\" y=\"" + num(y_q3) + "\" width=\"" + num(kBoxWidth) +
           "\" height=\"" + num(std::max(0.0, y_q1 - y_q3)) + "\" fill=\"#4a74b4\" stroke=\"black\"/>\n";
    svg += "<line class=\"median\" x1=\"" + num(left) + "\" y1=\"" + num(axis.y(s.median)) + "\" x2=\"" +
           num(left + kBoxWidth) + "\" y2=\"" + num(axis.y(s.median)) + "\" stroke=\"white\" stroke-width=\"2\"/>\n";
    svg += "<circle class=\"mean\" cx=\"" + num(cx) + "\" cy=\"" + num(axis.y(s.mean)) +
           "\" r=\"3\" fill=\"black\"/>\n";
    const double ly = kPlotTop + kPlotHeight + 10.0;
    svg += "<text x=\"" + num(cx) + "\" y=\"" + num(ly) + "\" transform=\"rotate(60 " + num(cx) + ' ' + num(ly) +
           ")\" font-family=\"sans-serif\" font-size=\"10\">" + escape(e.experiment) + ' ' + escape(e.group) + ' ' +
           escape(e.phase) + "</text>\n";
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void export_boxplot_svg(std::span<const BoxEntry> entries, const std::filesystem::path& path) {
  const std::string svg = boxplot_svg(entries);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
  out << svg;
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing '" + path.string() + "'");
}

}  // namespace rplace
