#include "mcf/grid_distance.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace mcf {

std::vector<std::array<int, 2>> coprime_stencil(int radius, bool one_dimensional) {
  if (radius < 1) throw Error(ErrorKind::InvalidArgument, "stencil radius must be >= 1");
  if (one_dimensional) return {{1, 0}, {-1, 0}};
  std::vector<std::array<int, 2>> out;
  for (int di = -radius; di <= radius; ++di) {
    for (int dj = -radius; dj <= radius; ++dj) {
      if (di == 0 && dj == 0) continue;
      if (std::gcd(std::abs(di), std::abs(dj)) != 1) continue;
      out.push_back({di, dj});
    }
  }
  return out;
}

std::vector<double> grid_dijkstra(const DistanceGrid& grid, int source, int stencil_radius, const EdgeLength& edge) {
  const int total = grid.size();
  if (source < 0 || source >= total) throw Error(ErrorKind::InvalidArgument, "source node out of range");
  const auto stencil = coprime_stencil(stencil_radius, grid.ny == 1);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(total), inf);
  std::vector<char> done(static_cast<std::size_t>(total), 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[static_cast<std::size_t>(source)] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, node] = heap.top();
    heap.pop();
    if (done[static_cast<std::size_t>(node)]) continue;
    done[static_cast<std::size_t>(node)] = 1;
    const int i = node / grid.ny;
    const int j = node % grid.ny;
    for (const auto& off : stencil) {
      int ni = i + off[0];
      int nj = j + off[1];
      if (grid.periodic[0]) ni = ((ni % grid.nx) + grid.nx) % grid.nx;
      if (grid.periodic[1]) nj = ((nj % grid.ny) + grid.ny) % grid.ny;
      if (ni < 0 || ni >= grid.nx || nj < 0 || nj >= grid.ny) continue;
      const int next = ni * grid.ny + nj;
      if (next == node || !grid.is_active(next) || done[static_cast<std::size_t>(next)]) continue;
      const double nd = d + edge(node, next, off[0], off[1]);
      if (nd < dist[static_cast<std::size_t>(next)]) {
        dist[static_cast<std::size_t>(next)] = nd;
        heap.emplace(nd, next);
      }
    }
  }
  return dist;
}

MetricGrid metric_grid(const SampledImmersion& imm, const std::vector<SmallMat>& g, int angular_samples) {
  if (static_cast<int>(g.size()) != imm.sample_count()) {
    throw Error(ErrorKind::InvalidArgument, "metric field does not match the immersion");
  }
  MetricGrid mg;
  switch (imm.kind) {
    case ImmersionKind::ClosedCurve:
      mg.grid.nx = imm.sample_count();
      mg.grid.ny = 1;
      mg.grid.periodic = {true, false};
      mg.h = {imm.spacing[0], 1.0};
      mg.g = g;
      break;
    case ImmersionKind::DiscGraph:
      mg.grid.nx = imm.dims[0];
      mg.grid.ny = imm.dims[1];
      mg.h = imm.spacing;
      mg.g = g;
      break;
    case ImmersionKind::RotationalProfile: {
      if (angular_samples < 8) throw Error(ErrorKind::InvalidArgument, "need at least 8 angular samples");
      mg.grid.nx = imm.sample_count();
      mg.grid.ny = angular_samples;
      mg.grid.periodic = {false, true};
      mg.h = {imm.spacing[0], 2.0 * M_PI / angular_samples};
      mg.g.reserve(static_cast<std::size_t>(mg.grid.size()));
      for (int k = 0; k < imm.sample_count(); ++k) {
        for (int a = 0; a < angular_samples; ++a) mg.g.push_back(g[static_cast<std::size_t>(k)]);
      }
      break;
    }
  }
  return mg;
}

int metric_grid_node(const SampledImmersion& imm, const MetricGrid& mg, int sample) {
  if (imm.kind == ImmersionKind::RotationalProfile) return sample * mg.grid.ny;
  return sample;
}

std::vector<double> metric_distances(const MetricGrid& mg, int source, int stencil_radius) {
  const bool one_d = mg.grid.ny == 1;
  return grid_dijkstra(mg.grid, source, stencil_radius, [&](int from, int to, int di, int dj) {
    const SmallMat gm = 0.5 * (mg.g[static_cast<std::size_t>(from)] + mg.g[static_cast<std::size_t>(to)]);
    if (one_d) return std::sqrt(gm(0, 0)) * std::abs(di) * mg.h[0];
    Eigen::Vector2d d(di * mg.h[0], dj * mg.h[1]);
    return std::sqrt(d.dot(gm.topLeftCorner(2, 2) * d));
  });
}

}  // namespace mcf
