#include <benchmark/benchmark.h>

#include "driftlab/dynamics.hpp"
#include "driftlab/invasion.hpp"
#include "driftlab/spectral.hpp"

using namespace driftlab;

namespace {

const SpeciesParams kResident{1.0, 0.5};

void BM_SpectralBound(benchmark::State& state) {
  const StreamTopology topo{static_cast<int>(state.range(0)), BoundaryCase::StreamToLake};
  const Vector r = Vector::LinSpaced(topo.n, -1.0, 2.0);
  const Matrix a = growth_operator(topo, 1.0, 0.5, r);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_bound(a).lambda);
}
BENCHMARK(BM_SpectralBound)->RangeMultiplier(2)->Range(4, 64);

void BM_QStar(benchmark::State& state) {
  const StreamTopology topo{static_cast<int>(state.range(0)), BoundaryCase::StreamToOcean};
  const Vector r = Vector::Constant(topo.n, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(q_star(topo, 0.7, r));
}
BENCHMARK(BM_QStar)->Arg(4)->Arg(16);

void BM_InvasionCurve(benchmark::State& state) {
  const StreamTopology topo{4, BoundaryCase::StreamToLake};
  const Vector r = Vector::Constant(4, 2.0);
  const auto grid = log_grid(0.01, 20.0, 200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(trace_invasion_curve(topo, r, kResident, grid).samples.size());
  }
}
BENCHMARK(BM_InvasionCurve)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const StreamTopology topo{4, BoundaryCase::StreamToLake};
  const CompetitionScenario s{topo, Vector::Constant(4, 2.0), kResident, {0.08, 0.44}};
  const auto times = uniform_times(static_cast<double>(state.range(0)), 100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate(s, Vector::Constant(4, 0.1), Vector::Constant(4, 2.0), times).steps);
  }
}
BENCHMARK(BM_Simulate)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
