#include <benchmark/benchmark.h>

#include "mpslam/engine.hpp"
#include "mpslam/experiment.hpp"

using namespace mpslam;

static void BM_FilterStep(benchmark::State& state) {
  const Scenario s = make_paper_scenario();
  const auto frames = simulate_frames(s, 1, 0, 12);
  EngineParams p;
  p.particles = static_cast<std::size_t>(state.range(0));
  p.transitions.birth_region = s.birth_region;
  SpaFilter f(s.pas, s.constants, p, s.prior, s.trajectory.front(), 3);
  // warm up until the map is populated
  for (std::size_t n = 0; n < 10; ++n) f.step(frames[n].per_pa);
  for (auto _ : state) {
    state.PauseTiming();
    SpaFilter g = f;
    state.ResumeTiming();
    benchmark::DoNotOptimize(g.step(frames[10].per_pa));
  }
}
BENCHMARK(BM_FilterStep)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
