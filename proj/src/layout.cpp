#include "neurograph/layout.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "neurograph/error.hpp"

namespace ng {

namespace {
std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}
}  // namespace

void ChannelLayout::validate() const {
  if (channels.size() < 2)
    fail_invalid("layout needs at least 2 channels, got " +
                 std::to_string(channels.size()));
  if (!(head_radius > 0.0)) fail_invalid("head_radius must be positive");
  std::unordered_set<std::string> seen;
  for (const auto& ch : channels) {
    if (ch.name.empty()) fail_invalid("empty channel name");
    if (!seen.insert(lower(ch.name)).second)
      fail_invalid("duplicate channel name: " + ch.name);
    for (double v : ch.pos)
      if (!std::isfinite(v)) fail_invalid("non-finite position for " + ch.name);
  }
}

double ChannelLayout::max_norm() const {
  double m = 0.0;
  for (const auto& ch : channels) {
    double n = std::sqrt(ch.pos[0] * ch.pos[0] + ch.pos[1] * ch.pos[1] +
                         ch.pos[2] * ch.pos[2]);
    m = std::max(m, n);
  }
  return m;
}

double distance(const Channel& a, const Channel& b) {
  double dx = a.pos[0] - b.pos[0];
  double dy = a.pos[1] - b.pos[1];
  double dz = a.pos[2] - b.pos[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

ChannelLayout parse_layout(const std::string& text) {
  ChannelLayout layout;
  std::istringstream in(text);
  std::string line;
  bool radius_given = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    if (tok[0] == '#') {
      std::string key;
      // accept both "# head_radius v" and "#head_radius v"
      if (tok.size() > 1)
        key = tok.substr(1);
      else
        ls >> key;
      if (lower(key) == "head_radius") {
        if (!(ls >> layout.head_radius))
          fail_io("layout line " + std::to_string(lineno) +
                  ": head_radius needs a value");
        radius_given = true;
      }
      continue;  // other comments ignored
    }
    Channel ch;
    ch.name = tok;
    if (!(ls >> ch.pos[0] >> ch.pos[1] >> ch.pos[2]))
      fail_io("layout line " + std::to_string(lineno) +
              ": expected `name x y z`");
    layout.channels.push_back(std::move(ch));
  }
  if (!radius_given) layout.head_radius = layout.max_norm();
  layout.validate();
  return layout;
}

ChannelLayout load_layout(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail_io("cannot open layout file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_layout(ss.str());
}

void save_layout(const ChannelLayout& layout, const std::string& path) {
  std::ofstream f(path);
  if (!f) fail_io("cannot write layout file: " + path);
  f.precision(17);
  f << "# head_radius " << layout.head_radius << "\n";
  for (const auto& ch : layout.channels)
    f << ch.name << " " << ch.pos[0] << " " << ch.pos[1] << " " << ch.pos[2]
      << "\n";
  if (!f) fail_io("write failed: " + path);
}

ChannelLayout default_layout12() {
  // Equator ring at 36 degree spacing plus the F3/F4 and FC5/FC6 pairs from
  // the standard spherical construction (compass angle from the nose,
  // inclination from the vertex). Unit head radius.
  auto sph = [](double incl_deg, double compass_deg) -> std::array<double, 3> {
    constexpr double kPi = 3.14159265358979323846;
    double ti = incl_deg * kPi / 180.0, tc = compass_deg * kPi / 180.0;
    return {-std::sin(ti) * std::sin(tc), std::sin(ti) * std::cos(tc),
            std::cos(ti)};
  };
  ChannelLayout layout;
  layout.head_radius = 1.0;
  layout.channels = {
      {"F7", sph(90, 54)},    {"F3", sph(60, 39)},    {"F4", sph(60, -39)},
      {"F8", sph(90, -54)},   {"FC5", sph(72, 69)},   {"FC6", sph(72, -69)},
      {"T7", sph(90, 90)},    {"T8", sph(90, -90)},   {"P7", sph(90, 126)},
      {"P8", sph(90, -126)},  {"O1", sph(90, 162)},   {"O2", sph(90, -162)},
  };
  return layout;
}

}  // namespace ng
