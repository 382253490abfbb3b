#include "neurograph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neurograph/error.hpp"

namespace ng {

std::vector<std::pair<std::size_t, std::size_t>> WeightedGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t c = node_count();
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = i + 1; j < c; ++j)
      if (adjacency.at2(i, j) > 0.0) out.emplace_back(i, j);
  return out;
}

void WeightedGraph::validate() const {
  layout.validate();
  const std::size_t c = layout.count();
  if (adjacency.rank() != 2 || adjacency.dim(0) != c || adjacency.dim(1) != c)
    fail_invalid("adjacency shape " + adjacency.shape_str() +
                 " does not match layout with " + std::to_string(c) +
                 " channels");
  for (std::size_t i = 0; i < c; ++i) {
    if (adjacency.at2(i, i) != 0.0) fail_invalid("adjacency has a self-link");
    for (std::size_t j = 0; j < c; ++j) {
      double w = adjacency.at2(i, j);
      if (w < 0.0 || !std::isfinite(w))
        fail_invalid("adjacency weight must be finite and nonnegative");
      if (w != adjacency.at2(j, i)) fail_invalid("adjacency not symmetric");
    }
  }
}

WeightedGraph build_adjacency(const ChannelLayout& layout,
                              double radius_fraction) {
  layout.validate();
  if (!(radius_fraction > 0.0) || radius_fraction > 1.0)
    fail_invalid("radius_fraction must be in (0, 1]");
  const std::size_t c = layout.count();
  const double r = radius_fraction * layout.head_radius;

  WeightedGraph g;
  g.layout = layout;
  g.adjacency = Tensor({c, c});
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = i + 1; j < c; ++j) {
      double d = distance(layout.channels[i], layout.channels[j]);
      if (d == 0.0) {
        warn("coincident channels " + layout.channels[i].name + " and " +
             layout.channels[j].name + "; edge weight set to 0");
        continue;
      }
      if (d <= r) {
        double w = 1.0 / (d * d);
        g.adjacency.at2(i, j) = w;
        g.adjacency.at2(j, i) = w;
      }
    }
  }
  return g;
}

namespace {

// Cyclic Jacobi on a copy; returns the diagonal after convergence.
std::vector<double> jacobi_eigenvalues(const Tensor& m) {
  const std::size_t n = m.dim(0);
  std::vector<double> a(m.buffer());
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = at(p, q);
        if (apq == 0.0) continue;
        double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double cs = 1.0 / std::sqrt(t * t + 1.0);
        double sn = t * cs;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = at(k, p), akq = at(k, q);
          at(k, p) = cs * akp - sn * akq;
          at(k, q) = sn * akp + cs * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = at(p, k), aqk = at(q, k);
          at(p, k) = cs * apk - sn * aqk;
          at(q, k) = sn * apk + cs * aqk;
        }
      }
    }
  }
  std::vector<double> evs(n);
  for (std::size_t i = 0; i < n; ++i) evs[i] = at(i, i);
  return evs;
}

double power_iteration_lambda_max(const Tensor& m) {
  const std::size_t n = m.dim(0);
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> w(n);
  // Gershgorin shift keeps the dominant eigenvalue of (M + sI) the one we
  // want even when M has large negative eigenvalues.
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row += std::abs(m.at2(i, j));
    shift = std::max(shift, row - m.at2(i, i));
  }
  double prev = 0.0;
  for (int it = 0; it < 10000; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = shift * v[i];
      const double* row = m.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
      w[i] = acc;
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    double est = norm - shift;
    if (it > 0 && std::abs(est - prev) <= 1e-8 * std::max(1.0, std::abs(est)))
      return est;
    prev = est;
  }
  return prev;
}

}  // namespace

std::vector<double> symmetric_eigenvalues(const Tensor& m) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1))
    fail_invalid("eigenvalues need a square matrix, got " + m.shape_str());
  return jacobi_eigenvalues(m);
}

double symmetric_lambda_max(const Tensor& m) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1))
    fail_invalid("lambda_max needs a square matrix, got " + m.shape_str());
  if (m.dim(0) <= 64) {
    auto evs = jacobi_eigenvalues(m);
    return *std::max_element(evs.begin(), evs.end());
  }
  return power_iteration_lambda_max(m);
}

SpectralBundle spectral_bundle(const WeightedGraph& graph) {
  graph.validate();
  const std::size_t c = graph.node_count();
  SpectralBundle b;
  b.laplacian = Tensor({c, c});
  bool any_edge = false;
  for (std::size_t i = 0; i < c; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      double w = graph.adjacency.at2(i, j);
      degree += w;
      b.laplacian.at2(i, j) = -w;
      if (w > 0.0) any_edge = true;
    }
    b.laplacian.at2(i, i) = degree;
  }
  if (!any_edge)
    fail_numeric("graph has no edges; Laplacian spectrum is degenerate");
  b.lambda_max = symmetric_lambda_max(b.laplacian);
  if (!(b.lambda_max > 0.0))
    fail_numeric("lambda_max not positive: " + std::to_string(b.lambda_max));
  b.rescaled = Tensor({c, c});
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j)
      b.rescaled.at2(i, j) =
          2.0 * b.laplacian.at2(i, j) / b.lambda_max - (i == j ? 1.0 : 0.0);
  return b;
}

WeightedGraph edge_dropout(const WeightedGraph& graph, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) fail_invalid("edge dropout p must be in [0, 1)");
  WeightedGraph out = graph;
  if (p == 0.0) return out;
  const std::size_t c = graph.node_count();
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = i + 1; j < c; ++j) {
      if (out.adjacency.at2(i, j) <= 0.0) continue;
      if (rng.bernoulli(p)) {
        out.adjacency.at2(i, j) = 0.0;
        out.adjacency.at2(j, i) = 0.0;
      }
    }
  }
  return out;
}

}  // namespace ng
