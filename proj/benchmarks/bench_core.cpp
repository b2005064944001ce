#include "mcf/flow.hpp"
#include "mcf/graph.hpp"
#include "mcf/grid_distance.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace mcf;

void BM_GeometryCircle(benchmark::State& state) {
  const SampledImmersion c = shapes::circle(1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_geometry(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeometryCircle)->Arg(128)->Arg(512)->Arg(2048);

void BM_GeometrySphere(benchmark::State& state) {
  const SampledImmersion s = shapes::sphere(1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_geometry(s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeometrySphere)->Arg(64)->Arg(256);

void BM_GeometryGraph(benchmark::State& state) {
  const PolynomialMap psi = PolynomialMap::random(2, 2, 3, 1);
  const int n = static_cast<int>(state.range(0));
  const SampledImmersion g = shapes::graph(2, 2, 1.0, n, [&](const Eigen::VectorXd& x) { return psi.value(x); });
  for (auto _ : state) benchmark::DoNotOptimize(compute_geometry(g));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_GeometryGraph)->Arg(17)->Arg(33);

void BM_FlowStepCircle(benchmark::State& state) {
  const SampledImmersion c = shapes::circle(1.0, static_cast<int>(state.range(0)));
  const GeometryField geom = compute_geometry(c);
  const double dt = adaptive_dt(c, geom, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(step(c, geom, dt));
}
BENCHMARK(BM_FlowStepCircle)->Arg(128)->Arg(512);

void BM_FlowStepSphere(benchmark::State& state) {
  const SampledImmersion s = shapes::sphere(1.0, static_cast<int>(state.range(0)));
  const GeometryField geom = compute_geometry(s);
  const double dt = adaptive_dt(s, geom, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(step(s, geom, dt));
}
BENCHMARK(BM_FlowStepSphere)->Arg(64)->Arg(256);

void BM_GridDijkstra(benchmark::State& state) {
  DistanceGrid grid;
  grid.nx = static_cast<int>(state.range(0));
  grid.ny = grid.nx;
  const int radius = static_cast<int>(state.range(1));
  const EdgeLength edge = [](int, int, int di, int dj) { return std::hypot(di, dj); };
  const int source = (grid.nx / 2) * grid.ny + grid.ny / 2;
  for (auto _ : state) benchmark::DoNotOptimize(grid_dijkstra(grid, source, radius, edge));
  state.SetItemsProcessed(state.iterations() * grid.size());
}
BENCHMARK(BM_GridDijkstra)->Args({64, 3})->Args({128, 5})->Args({256, 5});

}  // namespace

BENCHMARK_MAIN();
