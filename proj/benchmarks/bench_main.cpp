#include <benchmark/benchmark.h>

#include "greenforms/bundle.hpp"
#include "greenforms/dbar.hpp"
#include "greenforms/green.hpp"
#include "greenforms/hodge.hpp"
#include "greenforms/mesh.hpp"

using namespace greenforms;

static void BM_GenerateDisk(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_mesh(Shape::disk, {1.0}, res));
}
BENCHMARK(BM_GenerateDisk)->Arg(16)->Arg(32)->Arg(64);

static void BM_GenerateBox(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_mesh(Shape::box3d, {1, 1, 1}, res));
}
BENCHMARK(BM_GenerateBox)->Arg(6)->Arg(12);

static void BM_HodgeLaplacian(benchmark::State& state) {
  const auto m = generate_mesh(Shape::disk, {1.0}, static_cast<int>(state.range(0)));
  const auto b = FlatBundle::identity(1, m.count(1));
  const int p = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(HodgeLaplacian(m, p, b, BoundaryCondition::dirichlet));
}
BENCHMARK(BM_HodgeLaplacian)->Args({32, 0})->Args({32, 1})->Args({64, 1});

static void BM_GreenColumns(benchmark::State& state) {
  const auto m = generate_mesh(Shape::box3d, {1, 1, 1}, static_cast<int>(state.range(0)));
  const auto b = FlatBundle::identity(1, m.count(1));
  const int p = static_cast<int>(state.range(1));
  const HodgeLaplacian lap(m, p, b, BoundaryCondition::dirichlet);
  const auto src = stratified_sources(m, p, 16, 2.0 * m.mesh_width());
  for (auto _ : state) benchmark::DoNotOptimize(green_columns(lap, src));
}
BENCHMARK(BM_GreenColumns)->Args({8, 0})->Args({8, 1})->Args({12, 0})->Unit(benchmark::kMillisecond);

static void BM_PotentialSolve(benchmark::State& state) {
  const auto m = generate_mesh(Shape::disk, {1.0}, static_cast<int>(state.range(0)));
  const auto b = FlatBundle::identity(1, m.count(1));
  const HodgeLaplacian lap(m, 1, b, BoundaryCondition::neumann);
  const PotentialSolver ps(lap);
  Vec f = Vec::Ones(m.count(1));
  for (auto _ : state) benchmark::DoNotOptimize(ps.potential(f, true));
}
BENCHMARK(BM_PotentialSolve)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

static void BM_SolveD(benchmark::State& state) {
  const auto m = generate_mesh(Shape::disk, {1.0}, static_cast<int>(state.range(0)));
  const auto b = FlatBundle::identity(1, m.count(1));
  const DSolver ds(m, 1, b);
  Vec x(m.count(0));
  for (int v = 0; v < m.count(0); ++v) x[v] = m.vertex(v).x() * m.vertex(v).y();
  const Cochain f{1, 1, exterior_derivative(m, 0, b).matrix * x};
  for (auto _ : state) benchmark::DoNotOptimize(ds.solve(f));
}
BENCHMARK(BM_SolveD)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_DbarMinimalSolve(benchmark::State& state) {
  const auto d = disk_domain(static_cast<int>(state.range(0)));
  const auto s = build_system(d);
  const MinimalSolver solver(s);
  const CVec f = CVec::Ones(static_cast<Eigen::Index>(s.f_nodes.size()));
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(f));
}
BENCHMARK(BM_DbarMinimalSolve)->Arg(48)->Arg(96)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
