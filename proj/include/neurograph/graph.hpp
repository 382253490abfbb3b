#ifndef NEUROGRAPH_GRAPH_HPP
#define NEUROGRAPH_GRAPH_HPP

#include <utility>
#include <vector>

#include "neurograph/layout.hpp"
#include "neurograph/rng.hpp"
#include "neurograph/tensor.hpp"

namespace ng {

// Channel graph: symmetric nonnegative adjacency with zero diagonal.
struct WeightedGraph {
  Tensor adjacency;  // C x C
  ChannelLayout layout;

  std::size_t node_count() const { return layout.count(); }
  // Undirected edges (i < j) with positive weight.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  void validate() const;
};

// Laplacian quantities consumed by the Chebyshev filter.
struct SpectralBundle {
  Tensor laplacian;   // L = D - A
  double lambda_max;  // largest eigenvalue of L
  Tensor rescaled;    // 2 L / lambda_max - I, spectrum in [-1, 1]
};

// Inverse-squared-distance weights for every pair closer than
// radius_fraction * head_radius. Coincident channels get weight 0 and a
// warning. All-pairs scan; at a dozen channels a spatial tree buys nothing.
WeightedGraph build_adjacency(const ChannelLayout& layout,
                              double radius_fraction = 0.75);

// Throws on a fully disconnected graph (lambda_max would be 0).
SpectralBundle spectral_bundle(const WeightedGraph& graph);

// Each undirected edge dropped independently with probability p, both
// triangle entries together. Surviving weights unchanged.
WeightedGraph edge_dropout(const WeightedGraph& graph, double p, Rng& rng);

// Largest eigenvalue of a symmetric matrix: cyclic Jacobi up to 64 nodes,
// power iteration (rtol 1e-8, 10k iters) beyond.
double symmetric_lambda_max(const Tensor& m);

// All eigenvalues via cyclic Jacobi sweeps (symmetric input).
std::vector<double> symmetric_eigenvalues(const Tensor& m);

}  // namespace ng

#endif
