#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "magscan/io.hpp"

namespace magscan {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Series {
  const char* label;
  const char* color;
  std::vector<double> values;
};

}  // namespace

// Three curves against the assumed number of MAGs: the profile log-likelihood,
// the negative AIC, and the alternative penalized score, on a shared axis.
std::string profile_svg_text(const ProfileTable& pt) {
  const double width = 640, height = 440;
  const double left = 72, right = 616, top = 24, bottom = 384;

  std::vector<int> orders;
  for (const auto& e : pt.entries) orders.push_back(e.order);
  std::vector<Series> series{{"profile log-likelihood", "#1f77b4", {}},
                             {"negative AIC", "#d62728", {}},
                             {"alternative score", "#2ca02c", {}}};
  for (const auto& e : pt.entries) {
    series[0].values.push_back(e.loglik);
    series[1].values.push_back(-e.aic);
    series[2].values.push_back(e.alt_score);
  }

  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const auto& s : series)
    for (double v : s.values) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  if (!(ymax > ymin)) {
    ymin -= 1;
    ymax += 1;
  }
  double pad = 0.06 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const int omin = orders.front(), omax = orders.back();
  auto xpos = [&](double o) {
    if (omax == omin) return (left + right) / 2;
    return left + (o - omin) / (omax - omin) * (right - left);
  };
  auto ypos = [&](double v) { return bottom - (v - ymin) / (ymax - ymin) * (bottom - top); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
         num(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    double v = ymin + (ymax - ymin) * i / 4.0;
    double y = ypos(v);
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(y) + "\" x2=\"" + num(right) +
           "\" y2=\"" + num(y) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y + 4) +
           "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" + num(v) +
           "</text>\n";
  }
  for (int o : orders) {
    double x = xpos(o);
    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(x) +
           "\" y2=\"" + num(bottom + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(bottom + 20) +
           "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" +
           std::to_string(o) + "</text>\n";
  }
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) +
         "\" y2=\"" + num(bottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(right) +
         "\" y2=\"" + num(bottom) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + num((left + right) / 2) + "\" y=\"" + num(height - 12) +
         "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">assumed "
         "number of MAGs</text>\n";
  svg += "<text x=\"16\" y=\"" + num((top + bottom) / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 16 " +
         num((top + bottom) / 2) + ")\">score</text>\n";

  for (const auto& s : series) {
    std::string points;
    for (std::size_t i = 0; i < orders.size(); ++i)
      points += num(xpos(orders[i])) + "," + num(ypos(s.values[i])) + " ";
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(s.color) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    for (std::size_t i = 0; i < orders.size(); ++i)
      svg += "<circle cx=\"" + num(xpos(orders[i])) + "\" cy=\"" + num(ypos(s.values[i])) +
             "\" r=\"3\" fill=\"" + std::string(s.color) + "\"/>\n";
  }

  double ly = top + 8;
  for (const auto& s : series) {
    svg += "<line x1=\"" + num(right - 180) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(right - 156) + "\" y2=\"" + num(ly) + "\" stroke=\"" +
           std::string(s.color) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(right - 150) + "\" y=\"" + num(ly + 4) +
           "\" font-size=\"11\" font-family=\"sans-serif\">" + std::string(s.label) +
           "</text>\n";
    ly += 16;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace magscan
