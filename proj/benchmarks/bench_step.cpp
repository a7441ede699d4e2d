#include <benchmark/benchmark.h>

#include "medflow/evolution.hpp"

namespace {

medflow::LevelSetField disk_field(std::size_t n, double r) {
  auto cloud = std::make_shared<const medflow::PointCloud>(medflow::sample(
      medflow::Domain::torus(2), medflow::SamplerConfig::uniform_iid(double(n), 3), r));
  return medflow::make_field(cloud, [](std::span<const double> x) {
    return std::hypot(x[0] - 0.5, x[1] - 0.5) <= 0.3 ? 1.0 : 0.0;
  });
}

}  // namespace

static void BM_MedianFilterStepMBO(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const double r = std::sqrt(300.0 / (M_PI * static_cast<double>(n)));
  auto field = disk_field(n, r);
  auto cfg = medflow::EvolutionConfig::make(medflow::KernelSpec::annulus(0.9, r),
                                            medflow::EvolutionMode::MBO, 0.0);
  medflow::Evolver ev(field.cloud, cfg);
  for (auto _ : state) {
    field = ev.step(field);
    benchmark::DoNotOptimize(field.values.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_MedianFilterStepMBO)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

static void BM_MedianFilterStepLevelSet(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const double r = std::sqrt(300.0 / (M_PI * static_cast<double>(n)));
  auto field = disk_field(n, r);
  for (auto& v : field.values) v += 0.1;  // non-binary values
  auto cfg = medflow::EvolutionConfig::make(medflow::KernelSpec::annulus(0.9, r),
                                            medflow::EvolutionMode::LevelSet, 0.0);
  medflow::Evolver ev(field.cloud, cfg);
  for (auto _ : state) {
    field = ev.step(field);
    benchmark::DoNotOptimize(field.values.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_MedianFilterStepLevelSet)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
