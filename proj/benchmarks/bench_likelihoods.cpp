#include <benchmark/benchmark.h>

#include <random>

#include "mpslam/likelihoods.hpp"

using namespace mpslam;

static void BM_DispersedDelayPdf(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> z(1024);
  for (double& x : z) x = 3e-8 + 2e-9 * (u(rng) - 0.25);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(dispersed_delay_pdf(z[i++ & 1023], 3e-8, 6.7e-10, 2e-11));
}
BENCHMARK(BM_DispersedDelayPdf);

static void BM_DispersedAnglePdf(benchmark::State& state) {
  const double sigma = state.range(0) * 1e-3;
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(dispersed_angle_pdf(0.001 * (i++ & 255), 0.1, 0.17, sigma));
}
BENCHMARK(BM_DispersedAnglePdf)->Arg(17)->Arg(300)->Arg(2000);

static void BM_MixtureDensity(benchmark::State& state) {
  const ModelConstants c;
  const NoiseModel noise = NoiseModel::from(c);
  const auto ctx = MeasurementContext::make({3e-8, 0.3, -0.2, 30.0}, noise, c);
  const PredictedParams g{3e-8, 0.31, -0.21};
  const Dispersion psi{6.7e-10, 0.17, 0.17};
  for (auto _ : state) benchmark::DoNotOptimize(mixture_density(ctx, g, psi));
}
BENCHMARK(BM_MixtureDensity);
