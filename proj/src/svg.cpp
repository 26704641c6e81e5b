#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "adplan/bench.hpp"

namespace adplan {

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string svg_string(const Scenario& scenario, const PlanOutcome* outcome, std::span<const RegionAction> regions) {
  const GridMap& m = scenario.map();
  const double cs = m.cell_size();
  const double w = m.width() * cs;
  const double h = m.height() * cs;
  const int px = std::max(200, std::min(1200, 4 * std::max(m.width(), m.height())));
  const double line = std::max(w, h) / 400.0;
  auto cx = [&](int x) { return (x + 0.5) * cs; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px << "\" height=\"" << px << "\" viewBox=\"0 0 "
      << num(w) << ' ' << num(h) << "\">\n";

  const bool has_path = outcome != nullptr && !outcome->path.empty();
  if (has_path) {
    const StateHD& a = outcome->path.front();
    const StateHD& b = outcome->path.back();
    out << "<defs><linearGradient id=\"time\" gradientUnits=\"userSpaceOnUse\" x1=\"" << num(cx(a.x)) << "\" y1=\""
        << num(cx(a.y)) << "\" x2=\"" << num(cx(b.x)) << "\" y2=\"" << num(cx(b.y)) << "\">"
        << "<stop offset=\"0\" stop-color=\"#1f4fd6\"/><stop offset=\"1\" stop-color=\"#d62f1f\"/>"
        << "</linearGradient></defs>\n";
  }

  // y grows upward in the map; flip once for the whole scene.
  out << "<g transform=\"matrix(1 0 0 -1 0 " << num(h) << ")\">\n";
  out << "<rect class=\"free\" x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" fill=\"#ffffff\"/>\n";

  for (int y = 0; y < m.height(); ++y) {
    int x = 0;
    while (x < m.width()) {
      if (!m.occupied(x, y)) {
        ++x;
        continue;
      }
      const int x0 = x;
      while (x < m.width() && m.occupied(x, y)) ++x;
      out << "<rect class=\"occupied\" x=\"" << num(x0 * cs) << "\" y=\"" << num(y * cs) << "\" width=\""
          << num((x - x0) * cs) << "\" height=\"" << num(cs) << "\" fill=\"#202020\"/>\n";
    }
  }

  for (const DynamicObstacle& o : scenario.obstacles()) {
    const auto& wp = o.waypoints();
    if (wp.empty()) continue;
    out << "<path class=\"obstacle\" d=\"M" << num(wp[0].x) << ' ' << num(wp[0].y);
    for (std::size_t i = 1; i < wp.size(); ++i) out << " L" << num(wp[i].x) << ' ' << num(wp[i].y);
    out << "\" fill=\"none\" stroke=\"#9a9a9a\" stroke-opacity=\"0.7\" stroke-width=\"" << num(line) << "\"/>\n";
  }

  for (const RegionAction& r : regions) {
    out << "<circle class=\"region\" data-iteration=\"" << r.iteration << "\" cx=\"" << num(cx(r.center.x))
        << "\" cy=\"" << num(cx(r.center.y)) << "\" r=\"" << num(r.radius * cs)
        << "\" fill=\"#3a8f3a\" fill-opacity=\"0.08\" stroke=\"#3a8f3a\" stroke-width=\"" << num(line) << "\"/>\n";
  }

  if (has_path) {
    out << "<polyline class=\"path\" points=\"";
    for (std::size_t i = 0; i < outcome->path.size(); ++i) {
      if (i != 0) out << ' ';
      out << num(cx(outcome->path[i].x)) << ',' << num(cx(outcome->path[i].y));
    }
    out << "\" fill=\"none\" stroke=\"url(#time)\" stroke-width=\"" << num(2 * line) << "\"/>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

void render_svg(const Scenario& scenario, const PlanOutcome* outcome, std::span<const RegionAction> regions,
                const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << svg_string(scenario, outcome, regions);
  if (!f) throw std::runtime_error("cannot write " + path);
}

}  // namespace adplan
