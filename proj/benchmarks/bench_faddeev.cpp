#include <benchmark/benchmark.h>

#include "gelfand/faddeev.hpp"
#include "gelfand/potential.hpp"

using namespace gelfand;

namespace {

void BM_green_build_modulated(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto dom = build_domain(0.5, n);
  auto lat = std::make_shared<PaddedLattice>(dom, 4);
  Eigen::Vector3cd k;
  k << cplx(0, 0), cplx(0, 0), cplx(0, 2.0);
  for (auto _ : state) {
    GreenOperator op(lat, k);
    benchmark::DoNotOptimize(op.min_denominator());
  }
}
BENCHMARK(BM_green_build_modulated)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_green_apply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto dom = build_domain(0.5, n);
  auto lat = std::make_shared<PaddedLattice>(dom, 3);
  auto pair = make_theta_pair(1.0, 2.0, Eigen::Vector3d(0.4, 0.1, 0.0));
  GreenOperator op(lat, pair.k);
  GenerateParams p;
  p.amplitude = 0.5;
  p.width = 0.12;
  auto f = lat->embed(generate(dom, PotentialKind::GaussianBump, p, 1).values);
  for (auto _ : state) {
    auto out = op.apply(f);
    benchmark::DoNotOptimize(out[0]);
  }
}
BENCHMARK(BM_green_apply)->Arg(16)->Arg(24)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_solve_mu(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto dom = build_domain(0.5, n);
  GenerateParams p;
  p.amplitude = 0.5;
  p.width = 0.15;
  Potential v = generate(dom, PotentialKind::GaussianBump, p, 1);
  auto pair = make_theta_pair(1.0, 2.0, Eigen::Vector3d::Zero());
  for (auto _ : state) {
    auto st = solve_mu(v, pair.k);
    benchmark::DoNotOptimize(st.iterations);
  }
}
BENCHMARK(BM_solve_mu)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

}  // namespace
