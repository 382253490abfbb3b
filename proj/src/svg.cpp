#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "neurograph/error.hpp"
#include "neurograph/pipeline.hpp"

namespace ng {

namespace {
struct Rgb {
  int r, g, b;
};

// diverging blue-white-red ramp over [-1, 1]
Rgb ramp(double v) {
  v = std::clamp(v, -1.0, 1.0);
  auto lerp = [](int a, int b, double t) {
    return static_cast<int>(std::lround(a + (b - a) * t));
  };
  const Rgb blue{33, 102, 172}, white{247, 247, 247}, red{178, 24, 43};
  if (v < 0.0) {
    double t = v + 1.0;  // 0 at -1, 1 at 0
    return {lerp(blue.r, white.r, t), lerp(blue.g, white.g, t),
            lerp(blue.b, white.b, t)};
  }
  return {lerp(white.r, red.r, v), lerp(white.g, red.g, v),
          lerp(white.b, red.b, v)};
}
}  // namespace

void save_topomap_svg(const ContributionMap& map, const std::string& path) {
  map.layout.validate();
  if (map.scores.size() != map.layout.count())
    fail_invalid("map scores do not match layout");

  const std::size_t c = map.layout.count();
  std::vector<double> px(c), py(c);
  for (std::size_t i = 0; i < c; ++i) {
    px[i] = map.layout.channels[i].pos[0] / map.layout.head_radius;
    py[i] = map.layout.channels[i].pos[1] / map.layout.head_radius;
  }
  double max_abs = 1e-12;
  for (double s : map.scores) max_abs = std::max(max_abs, std::abs(s));

  constexpr int kGrid = 64;
  constexpr double kCanvas = 420.0, kMargin = 30.0;
  const double span = kCanvas - 2.0 * kMargin;
  const double cell = span / kGrid;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas
      << "\" height=\"" << kCanvas << "\" viewBox=\"0 0 " << kCanvas << " "
      << kCanvas << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<clipPath id=\"head\"><circle cx=\"" << kCanvas / 2 << "\" cy=\""
      << kCanvas / 2 << "\" r=\"" << span / 2 << "\"/></clipPath>\n";
  svg << "<g clip-path=\"url(#head)\">\n";

  for (int gy = 0; gy < kGrid; ++gy) {
    for (int gx = 0; gx < kGrid; ++gx) {
      // grid cell centre in head coordinates; +y is the nose, which points up
      double hx = -1.0 + 2.0 * (gx + 0.5) / kGrid;
      double hy = 1.0 - 2.0 * (gy + 0.5) / kGrid;
      if (hx * hx + hy * hy > 1.1) continue;
      // inverse-distance-weighted interpolation, power 2
      double wsum = 0.0, vsum = 0.0;
      bool exact = false;
      double value = 0.0;
      for (std::size_t i = 0; i < c; ++i) {
        double d2 = (hx - px[i]) * (hx - px[i]) + (hy - py[i]) * (hy - py[i]);
        if (d2 < 1e-12) {
          exact = true;
          value = map.scores[i];
          break;
        }
        double w = 1.0 / d2;
        wsum += w;
        vsum += w * map.scores[i];
      }
      if (!exact) value = vsum / wsum;
      Rgb col = ramp(value / max_abs);
      svg << "<rect x=\"" << kMargin + gx * cell << "\" y=\""
          << kMargin + gy * cell << "\" width=\"" << cell + 0.5
          << "\" height=\"" << cell + 0.5 << "\" fill=\"rgb(" << col.r << ","
          << col.g << "," << col.b << ")\"/>\n";
    }
  }
  svg << "</g>\n";
  svg << "<circle cx=\"" << kCanvas / 2 << "\" cy=\"" << kCanvas / 2
      << "\" r=\"" << span / 2
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
  // nose marker
  svg << "<path d=\"M " << kCanvas / 2 - 12 << " " << kMargin << " L "
      << kCanvas / 2 << " " << kMargin - 14 << " L " << kCanvas / 2 + 12 << " "
      << kMargin << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";

  for (std::size_t i = 0; i < c; ++i) {
    double sx = kCanvas / 2 + px[i] * span / 2;
    double sy = kCanvas / 2 - py[i] * span / 2;
    svg << "<circle cx=\"" << sx << "\" cy=\"" << sy
        << "\" r=\"3\" fill=\"black\"/>\n";
    svg << "<text x=\"" << sx + 5 << "\" y=\"" << sy - 5
        << "\" font-size=\"11\" font-family=\"sans-serif\">"
        << map.layout.channels[i].name << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream os(path);
  if (!os) fail_io("cannot write svg: " + path);
  os << svg.str();
  if (!os) fail_io("write failed: " + path);
}

}  // namespace ng
