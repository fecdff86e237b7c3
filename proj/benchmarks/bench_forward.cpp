#include <benchmark/benchmark.h>

#include "gelfand/forward.hpp"
#include "gelfand/potential.hpp"

using namespace gelfand;

namespace {

Potential bump(const DomainPtr& dom, double amplitude, std::uint64_t seed) {
  GenerateParams p;
  p.amplitude = amplitude;
  p.width = 0.12;
  return generate(dom, PotentialKind::GaussianBump, p, seed);
}

void BM_factorize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto dom = build_domain(0.5, n);
  Potential v = bump(dom, 0.4, 1);
  for (auto _ : state) {
    DirichletSolver solver(dom, v, 1.0);
    benchmark::DoNotOptimize(solver.stencil_scale());
  }
  state.SetLabel(std::to_string(n * n * n) + " unknowns");
}
BENCHMARK(BM_factorize)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_boundary_solve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto dom = build_domain(0.5, n);
  Potential v = bump(dom, 0.4, 1);
  DirichletSolver solver(dom, v, 1.0);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dom->boundary_count());
  g(0) = 1.0;
  for (auto _ : state) {
    Eigen::VectorXd nu = solver.neumann(g);
    benchmark::DoNotOptimize(nu.sum());
  }
}
BENCHMARK(BM_boundary_solve)->Arg(12)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_kernel_assembly(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto dom = build_domain(0.5, n);
  Potential v = bump(dom, 0.4, 1);
  for (auto _ : state) {
    DtnMap map = dtn_map(dom, v, 1.0);
    benchmark::DoNotOptimize(map.kernel(0, 0));
  }
}
BENCHMARK(BM_kernel_assembly)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_delta_lowrank(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto dom = build_domain(0.5, n);
  Potential v1 = bump(dom, 0.4, 1);
  GenerateParams pd;
  pd.amplitude = 0.15;
  pd.width = 0.18;
  Potential d = generate(dom, PotentialKind::CosineBump, pd, 2);
  Potential v2 = lincomb(1.0, v1, 1.0, d);
  Potential vdiff = lincomb(-1.0, v1, 1.0, v2);
  DirichletSolver s1(dom, v1, 1.0), s2(dom, v2, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(delta_norm_lowrank(s1, s2, vdiff));
  }
}
BENCHMARK(BM_delta_lowrank)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
