#pragma once

#include "mcf/geometry.hpp"

#include <array>
#include <functional>
#include <vector>

namespace mcf {

/// Offsets (di, dj) with gcd(|di|, |dj|) = 1 and max(|di|, |dj|) <= radius.
/// A 1-D grid uses only (+-1, 0).
std::vector<std::array<int, 2>> coprime_stencil(int radius, bool one_dimensional = false);

/// Shortest paths over a structured nx x ny grid; node index i * ny + j.
struct DistanceGrid {
  int nx = 0;
  int ny = 1;
  std::array<bool, 2> periodic{false, false};
  /// Empty means every node is active.
  std::vector<char> active;

  int size() const { return nx * ny; }
  bool is_active(int node) const { return active.empty() || active[static_cast<std::size_t>(node)] != 0; }
};

/// Edge length for the stencil move (di, dj) between nodes `from` and `to`.
using EdgeLength = std::function<double(int from, int to, int di, int dj)>;

/// Dijkstra from `source`; unreachable nodes get +inf. Ties are settled in index order.
std::vector<double> grid_dijkstra(const DistanceGrid& grid, int source, int stencil_radius, const EdgeLength& edge);

/// Per-node metric on a grid in parameter coordinates with steps h.
struct MetricGrid {
  DistanceGrid grid;
  std::array<double, 2> h{1.0, 1.0};
  std::vector<SmallMat> g;
};

/// Metric grid of an immersion for the metric field g (one entry per sample).
/// Profiles are unrolled into (meridian sample, angle) with `angular_samples` angles;
/// node (k, a) uses g[k]. Curves give a periodic 1-D grid.
MetricGrid metric_grid(const SampledImmersion& imm, const std::vector<SmallMat>& g, int angular_samples = 64);

/// Node of the metric grid that carries immersion sample s (angle 0 for profiles).
int metric_grid_node(const SampledImmersion& imm, const MetricGrid& mg, int sample);

/// Distances with edge length sqrt(D^T g_avg D), D = (di h0, dj h1), g_avg the endpoint mean.
std::vector<double> metric_distances(const MetricGrid& mg, int source, int stencil_radius = 5);

}  // namespace mcf
