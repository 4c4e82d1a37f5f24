#include <benchmark/benchmark.h>

#include <random>

#include "mpslam/association.hpp"

using namespace mpslam;

namespace {

FactorTable random_table(std::size_t features, std::size_t measurements, std::size_t particles) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 2.0);
  FactorTable t;
  t.num_measurements = measurements;
  for (std::size_t f = 0; f < features; ++f) {
    FeatureNode node;
    node.log_base.assign(particles, std::log(0.9 / particles));
    node.log_mass0 = std::log(0.1);
    for (std::size_t l = 0; l < measurements; ++l) {
      Link link;
      link.measurement = l;
      link.log_lambda.resize(particles);
      for (double& x : link.log_lambda) x = n(rng);
      node.links.push_back(std::move(link));
    }
    t.nodes.push_back(std::move(node));
  }
  return t;
}

}  // namespace

static void BM_Associate(benchmark::State& state) {
  const FactorTable base = random_table(state.range(0), state.range(1), state.range(2));
  for (auto _ : state) {
    FactorTable t = base;
    benchmark::DoNotOptimize(associate(t, 3, 1e-6));
  }
}
BENCHMARK(BM_Associate)->Args({5, 10, 1})->Args({5, 10, 1000})->Args({10, 20, 1000});

static void BM_ScalarAssociate(benchmark::State& state) {
  ScalarAssociationProblem pr;
  pr.num_measurements = 3;
  for (int k = 0; k < 3; ++k) pr.legacy.push_back({0.7, {2.0, 0.5, 1.0 + k}});
  for (auto _ : state) benchmark::DoNotOptimize(associate(pr));
}
BENCHMARK(BM_ScalarAssociate);
