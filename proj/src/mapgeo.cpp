#include "neurograph/mapgeo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "neurograph/error.hpp"
#include "neurograph/rng.hpp"

namespace ng {

MapPointCloud to_polar_cloud(const ContributionMap& map) {
  map.layout.validate();
  if (map.scores.size() != map.layout.count())
    fail_invalid("contribution map scores do not match its layout");
  MapPointCloud cloud;
  cloud.points.reserve(map.layout.count());
  for (std::size_t i = 0; i < map.layout.count(); ++i) {
    const auto& ch = map.layout.channels[i];
    double planar = std::hypot(ch.pos[0], ch.pos[1]);
    if (planar < 1e-12)
      fail_invalid("channel " + ch.name +
                   " projects onto the planar origin; azimuth undefined");
    double azimuth = std::atan2(ch.pos[1], ch.pos[0]);
    cloud.points.push_back(
        {azimuth, planar / map.layout.head_radius, map.scores[i]});
  }
  return cloud;
}

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail_invalid("wasserstein_1d on empty samples");
  if (a.size() != b.size())
    fail_invalid("wasserstein_1d needs equal sizes (uniform masses), got " +
                 std::to_string(a.size()) + " and " + std::to_string(b.size()));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total / static_cast<double>(a.size());
}

std::vector<std::array<double, 3>> sample_sphere(std::size_t n,
                                                 std::uint64_t seed) {
  std::vector<std::array<double, 3>> dirs;
  dirs.reserve(n);
  Rng root(Rng::mix(seed ^ 0x7370686572ULL));  // "spher"
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = root.derive(i);
    double x, y, z, norm;
    do {
      x = rng.normal();
      y = rng.normal();
      z = rng.normal();
      norm = std::sqrt(x * x + y * y + z * z);
    } while (norm < 1e-12);
    dirs.push_back({x / norm, y / norm, z / norm});
  }
  return dirs;
}

namespace {
double pairwise_sum(const std::vector<double>& v, std::size_t from,
                    std::size_t count) {
  if (count == 1) return v[from];
  if (count == 2) return v[from] + v[from + 1];
  std::size_t half = count / 2;
  return pairwise_sum(v, from, half) + pairwise_sum(v, from + half, count - half);
}
}  // namespace

double sgw_with_projections(
    const MapPointCloud& g1, const MapPointCloud& g2,
    const std::vector<std::array<double, 3>>& directions,
    double* standard_error, const std::array<double, 3>& axis_scale) {
  if (g1.points.empty() || g2.points.empty())
    fail_invalid("sliced distance on an empty cloud");
  if (g1.points.size() != g2.points.size())
    fail_invalid("sliced distance needs equal point counts");
  if (directions.empty()) fail_invalid("need at least one projection");

  const std::size_t np = g1.points.size();
  std::vector<double> p1(np), p2(np);
  std::vector<double> w1s;
  w1s.reserve(directions.size());
  for (const auto& dir : directions) {
    for (std::size_t i = 0; i < np; ++i) {
      const auto& a = g1.points[i];
      const auto& b = g2.points[i];
      p1[i] = dir[0] * axis_scale[0] * a[0] + dir[1] * axis_scale[1] * a[1] +
              dir[2] * axis_scale[2] * a[2];
      p2[i] = dir[0] * axis_scale[0] * b[0] + dir[1] * axis_scale[1] * b[1] +
              dir[2] * axis_scale[2] * b[2];
    }
    w1s.push_back(wasserstein_1d(p1, p2));
  }
  const double n = static_cast<double>(w1s.size());
  const double mean = pairwise_sum(w1s, 0, w1s.size()) / n;
  if (standard_error) {
    if (w1s.size() < 2) {
      *standard_error = 0.0;
    } else {
      double ss = 0.0;
      for (double v : w1s) ss += (v - mean) * (v - mean);
      *standard_error = std::sqrt(ss / (n - 1.0) / n);
    }
  }
  return mean;
}

double sgw_distance(const MapPointCloud& g1, const MapPointCloud& g2,
                    std::size_t n_projections, std::uint64_t seed,
                    double* standard_error,
                    const std::array<double, 3>& axis_scale) {
  if (n_projections < 1) fail_invalid("n_projections must be >= 1");
  auto dirs = sample_sphere(n_projections, seed);
  return sgw_with_projections(g1, g2, dirs, standard_error, axis_scale);
}

DistanceMatrix distance_matrix(const std::vector<ContributionMap>& maps,
                               const std::vector<std::string>& labels,
                               std::size_t n_projections, std::uint64_t seed,
                               const std::array<double, 3>& axis_scale) {
  if (maps.size() < 2) fail_invalid("distance matrix needs at least 2 maps");
  if (labels.size() != maps.size())
    fail_invalid("one label per map required");
  for (std::size_t i = 1; i < maps.size(); ++i)
    if (!(maps[i].layout == maps[0].layout))
      fail_invalid("map " + labels[i] + " has a different layout than " +
                   labels[0]);

  std::vector<MapPointCloud> clouds;
  clouds.reserve(maps.size());
  for (const auto& m : maps) clouds.push_back(to_polar_cloud(m));

  auto dirs = sample_sphere(n_projections, seed);
  DistanceMatrix dm;
  dm.labels = labels;
  dm.values = Tensor({maps.size(), maps.size()});
  for (std::size_t i = 0; i < maps.size(); ++i) {
    for (std::size_t j = i + 1; j < maps.size(); ++j) {
      double d = sgw_with_projections(clouds[i], clouds[j], dirs, nullptr,
                                      axis_scale);
      dm.values.at2(i, j) = d;
      dm.values.at2(j, i) = d;
    }
  }
  return dm;
}

void save_distance_matrix_csv(const DistanceMatrix& dm,
                              const std::string& path) {
  std::ofstream os(path);
  if (!os) fail_io("cannot write distance matrix csv: " + path);
  os.precision(17);
  os << "map";
  for (const auto& l : dm.labels) os << "," << l;
  os << "\n";
  for (std::size_t i = 0; i < dm.labels.size(); ++i) {
    os << dm.labels[i];
    for (std::size_t j = 0; j < dm.labels.size(); ++j)
      os << "," << dm.values.at2(i, j);
    os << "\n";
  }
  if (!os) fail_io("write failed: " + path);
}

}  // namespace ng
