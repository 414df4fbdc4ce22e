#include <benchmark/benchmark.h>

#include <random>

#include "fmadj/adjoint.hpp"
#include "fmadj/flowmap.hpp"
#include "fmadj/operators.hpp"
#include "fmadj/poisson.hpp"
#include "fmadj/reference.hpp"

using namespace fmadj;

namespace {

GridSpec grid(int n) { return GridSpec{n, n, 1.0 / n, {}}; }

VectorField swirl(const GridSpec& g) {
  return sample_vector(g, [](Vec2 p) {
    return Vec2{std::sin(M_PI * p.x) * std::cos(M_PI * p.y), -std::cos(M_PI * p.x) * std::sin(M_PI * p.y)};
  });
}

ScalarField noise(const GridSpec& g) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ScalarField f(g);
  for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = d(rng);
  return f;
}

void BM_Laplacian(benchmark::State& st) {
  const VectorField u = swirl(grid(int(st.range(0))));
  for (auto _ : st) benchmark::DoNotOptimize(laplacian(u));
}

void BM_LaplacianReference(benchmark::State& st) {
  const VectorField u = swirl(grid(int(st.range(0))));
  for (auto _ : st) benchmark::DoNotOptimize(reference::laplacian(u));
}

void BM_Advect(benchmark::State& st) {
  const VectorField u = swirl(grid(int(st.range(0))));
  for (auto _ : st) benchmark::DoNotOptimize(sl_advect(u, u, 0.01));
}

void BM_AdvectReference(benchmark::State& st) {
  const VectorField u = swirl(grid(int(st.range(0))));
  for (auto _ : st) benchmark::DoNotOptimize(reference::sl_advect(u, u, 0.01));
}

void BM_March(benchmark::State& st) {
  const GridSpec g = grid(int(st.range(0)));
  const VectorField u = swirl(g);
  SampledMap m(g);
  for (auto _ : st) march(m, u, 1e-3);
}

void BM_MarchReference(benchmark::State& st) {
  const GridSpec g = grid(int(st.range(0)));
  const VectorField u = swirl(g);
  SampledMap m(g);
  for (auto _ : st) reference::march(m, u, 1e-3);
}

void BM_GradTranspose(benchmark::State& st) {
  const VectorField u = swirl(grid(int(st.range(0))));
  for (auto _ : st) benchmark::DoNotOptimize(grad_transpose_product(u, u));
}

void BM_GradTransposeReference(benchmark::State& st) {
  const VectorField u = swirl(grid(int(st.range(0))));
  for (auto _ : st) benchmark::DoNotOptimize(reference::grad_transpose_product(u, u));
}

void BM_PoissonSolve(benchmark::State& st) {
  const GridSpec g = grid(int(st.range(0)));
  PoissonSolver solver(g, BoundarySpec{}, PoissonConfig{});
  const ScalarField rhs = noise(g);
  PoissonStats stats;
  for (auto _ : st) benchmark::DoNotOptimize(solver.solve(rhs, &stats));
  st.counters["iterations"] = stats.iterations;
}

}  // namespace

BENCHMARK(BM_Laplacian)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_LaplacianReference)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_Advect)->Arg(64)->Arg(128);
BENCHMARK(BM_AdvectReference)->Arg(64)->Arg(128);
BENCHMARK(BM_March)->Arg(64)->Arg(128);
BENCHMARK(BM_MarchReference)->Arg(64)->Arg(128);
BENCHMARK(BM_GradTranspose)->Arg(64)->Arg(128);
BENCHMARK(BM_GradTransposeReference)->Arg(64)->Arg(128);
BENCHMARK(BM_PoissonSolve)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
