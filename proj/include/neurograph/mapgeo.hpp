#ifndef NEUROGRAPH_MAPGEO_HPP
#define NEUROGRAPH_MAPGEO_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "neurograph/explain.hpp"
#include "neurograph/tensor.hpp"

namespace ng {

// One point per channel: (azimuth, normalized scalp radius, score), uniform
// mass 1/C.
struct MapPointCloud {
  std::vector<std::array<double, 3>> points;
};

// Top-down projection of the electrode positions with the standardized
// score as the third coordinate. Channels at the planar origin are rejected
// (their azimuth is undefined).
MapPointCloud to_polar_cloud(const ContributionMap& map);

// Equal-mass 1D Wasserstein: mean absolute difference of the sorted samples.
double wasserstein_1d(std::vector<double> a, std::vector<double> b);

// Uniform directions on S^2, one independent substream per index.
std::vector<std::array<double, 3>> sample_sphere(std::size_t n,
                                                 std::uint64_t seed);

// Monte Carlo sliced distance over explicit directions; per-projection
// means are combined by pairwise summation so the result is independent of
// accumulation order. standard_error (optional) receives the Monte Carlo
// standard error of the estimate.
double sgw_with_projections(
    const MapPointCloud& g1, const MapPointCloud& g2,
    const std::vector<std::array<double, 3>>& directions,
    double* standard_error = nullptr,
    const std::array<double, 3>& axis_scale = {1.0, 1.0, 1.0});

double sgw_distance(const MapPointCloud& g1, const MapPointCloud& g2,
                    std::size_t n_projections, std::uint64_t seed,
                    double* standard_error = nullptr,
                    const std::array<double, 3>& axis_scale = {1.0, 1.0,
                                                               1.0});

struct DistanceMatrix {
  std::vector<std::string> labels;
  Tensor values;  // n x n, symmetric, zero diagonal
};

// Pairwise sliced distances with one shared projection set for every pair.
DistanceMatrix distance_matrix(const std::vector<ContributionMap>& maps,
                               const std::vector<std::string>& labels,
                               std::size_t n_projections, std::uint64_t seed,
                               const std::array<double, 3>& axis_scale = {
                                   1.0, 1.0, 1.0});

void save_distance_matrix_csv(const DistanceMatrix& dm,
                              const std::string& path);

}  // namespace ng

#endif
