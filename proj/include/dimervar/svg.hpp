#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <utility>

#include "lattice.hpp"
#include "variational.hpp"

namespace dimervar::svg {

// One fill per class a, b, c, d.
inline constexpr std::array<const char*, 4> class_fill{"#d62728", "#1f77b4", "#2ca02c", "#ffbf00"};

inline void header(std::ostream& os, double w, double h) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
}

inline void footer(std::ostream& os) { os << "</svg>\n"; }

/// Dominos as rectangles, coloured by class, with the y axis pointing up.
inline void render_tiling(std::ostream& os, const Tiling& t, double unit = 12) {
  if (t.dominos.empty()) throw InvalidTiling("nothing to render");
  int x0 = t.dominos[0].cell1.x, y0 = t.dominos[0].cell1.y, x1 = x0, y1 = y0;
  for (const auto& d : t.dominos) {
    x0 = std::min(x0, d.cell1.x), y0 = std::min(y0, d.cell1.y);
    x1 = std::max(x1, d.cell2.x), y1 = std::max(y1, d.cell2.y);
  }
  const double pad = unit;
  const double W = (x1 - x0 + 1) * unit + 2 * pad, H = (y1 - y0 + 1) * unit + 2 * pad;
  header(os, W, H);
  os << "<g stroke=\"#222\" stroke-width=\"" << unit / 12 << "\">\n";
  for (const auto& d : t.dominos) {
    const double w = (d.cell2.x - d.cell1.x + 1) * unit, h = (d.cell2.y - d.cell1.y + 1) * unit;
    const double x = pad + (d.cell1.x - x0) * unit, y = H - pad - (d.cell1.y - y0) * unit - h;
    os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h << "\" fill=\""
       << class_fill[static_cast<int>(d.cls)] << "\"/>\n";
  }
  os << "</g>\n";
  footer(os);
}

namespace detail {

// Blue (flat) to red (frozen) ramp on [0, 1].
inline std::string ramp(double u) {
  u = std::clamp(u, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(40 + 215 * u));
  const int g = static_cast<int>(std::lround(70 + 120 * (1 - std::abs(2 * u - 1))));
  const int b = static_cast<int>(std::lround(255 - 215 * u));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace detail

/// Heat map of (|s| + |t|) / 2 per mesh cell, with the boundary between
/// extremal and non-extremal cells drawn on top.
inline void render_field(std::ostream& os, const DiscreteField& F, double eta = 1e-3, double size = 600) {
  const auto tilts = tilt_field(F);
  const auto centres = cell_centres(F);
  if (tilts.empty()) throw InvalidRegion("field has no complete mesh cells");
  double xmin = centres[0].x, xmax = xmin, ymin = centres[0].y, ymax = ymin;
  for (auto p : centres)
    xmin = std::min(xmin, p.x), xmax = std::max(xmax, p.x), ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
  const double d = F.delta;
  xmin -= d / 2, xmax += d / 2, ymin -= d / 2, ymax += d / 2;
  const double k = size / std::max(xmax - xmin, ymax - ymin);
  const double W = (xmax - xmin) * k, H = (ymax - ymin) * k;
  auto X = [&](double x) { return (x - xmin) * k; };
  auto Y = [&](double y) { return H - (y - ymin) * k; };
  header(os, W, H);
  std::map<std::pair<long, long>, bool> frozen;
  os << "<g stroke=\"none\">\n";
  for (std::size_t c = 0; c < tilts.size(); ++c) {
    const auto p = centres[c];
    const double m = (std::abs(tilts[c].s) + std::abs(tilts[c].t)) / 2;
    frozen[{std::lround(p.x / d - 0.5), std::lround(p.y / d - 0.5)}] = is_extremal(tilts[c], eta);
    os << "<rect x=\"" << X(p.x - d / 2) << "\" y=\"" << Y(p.y + d / 2) << "\" width=\"" << d * k + 0.05
       << "\" height=\"" << d * k + 0.05 << "\" fill=\"" << detail::ramp(m) << "\"/>\n";
  }
  os << "</g>\n<path fill=\"none\" stroke=\"#000\" stroke-width=\"" << std::max(1.0, d * k / 4) << "\" d=\"";
  for (const auto& [ij, fr] : frozen) {
    const auto [i, j] = ij;
    if (auto it = frozen.find({i + 1, j}); it != frozen.end() && it->second != fr)
      os << 'M' << X((i + 1) * d) << ',' << Y(j * d) << 'L' << X((i + 1) * d) << ',' << Y((j + 1) * d);
    if (auto it = frozen.find({i, j + 1}); it != frozen.end() && it->second != fr)
      os << 'M' << X(i * d) << ',' << Y((j + 1) * d) << 'L' << X((i + 1) * d) << ',' << Y((j + 1) * d);
  }
  os << "\"/>\n";
  footer(os);
}

}  // namespace dimervar::svg
