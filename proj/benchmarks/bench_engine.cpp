#include <benchmark/benchmark.h>

#include "qdiff/correlator.hpp"
#include "qdiff/mc.hpp"
#include "qdiff/pattern.hpp"

using namespace qdiff;
using states::StateKind;
using states::StateSpec;

static void BM_BuildCoherentState(benchmark::State& state) {
  const auto spec = StateSpec::collective(StateKind::CollectiveCoherent, static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(states::build_state(spec));
}
BENCHMARK(BM_BuildCoherentState)->Arg(1)->Arg(4)->Arg(16);

static void BM_MatrixElementsQuadrature(benchmark::State& state) {
  const auto spec = StateSpec::collective(StateKind::PhaseDiffused, static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(correlator::matrix_elements(spec, 2));
  state.SetLabel(correlator::matrix_elements(spec, 2).averaging);
}
BENCHMARK(BM_MatrixElementsQuadrature)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_MatrixElementsMonteCarlo(benchmark::State& state) {
  const auto spec = StateSpec::collective(StateKind::Chaotic, 1.0);
  const auto avg = correlator::PhaseAverageSpec::monte_carlo(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(correlator::matrix_elements(spec, 2, avg));
}
BENCHMARK(BM_MatrixElementsMonteCarlo)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_EnginePattern(benchmark::State& state) {
  const auto geom = pattern::default_geometry(4.0);
  const auto grid = pattern::grid_over_u(geom, -10.0, 10.0, static_cast<int>(state.range(0)));
  const auto spec = StateSpec::substate(StateKind::Noon, 4);
  const auto table = correlator::matrix_elements(spec, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        pattern::engine_pattern(table, spec, pattern::DetectionScheme::opposite(), grid, geom));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EnginePattern)->Arg(1001)->Arg(100001);

static void BM_CatalogPattern(benchmark::State& state) {
  const auto geom = pattern::default_geometry(4.0);
  const auto grid = pattern::grid_over_u(geom, -10.0, 10.0, static_cast<int>(state.range(0)));
  const auto spec = StateSpec::collective(StateKind::Chaotic, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pattern::catalog_p2(spec, pattern::DetectionScheme::opposite(), grid, geom));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CatalogPattern)->Arg(1001)->Arg(100001);

static void BM_DetectionEvents(benchmark::State& state) {
  const auto geom = pattern::default_geometry(4.0);
  const auto law = pattern::catalog_p2(StateSpec::collective(StateKind::Chaotic, 1.0),
                                       pattern::DetectionScheme::opposite(), pattern::default_grid(geom), geom);
  const auto run = mc::make_run(law, static_cast<std::uint64_t>(state.range(0)), 7, 100);
  for (auto _ : state) benchmark::DoNotOptimize(mc::simulate(run));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DetectionEvents)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_EffectiveWidth(benchmark::State& state) {
  const auto geom = pattern::default_geometry(4.0);
  for (auto _ : state) benchmark::DoNotOptimize(pattern::effective_width_streaming(2, geom));
}
BENCHMARK(BM_EffectiveWidth)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
