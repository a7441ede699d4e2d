#include <benchmark/benchmark.h>

#include "medflow/domain.hpp"
#include "medflow/rng.hpp"

static void BM_FixedRadiusQuery(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const double r = std::sqrt(300.0 / (M_PI * static_cast<double>(n)));  // ~300 hits
  const auto cloud = medflow::sample(medflow::Domain::torus(2),
                                     medflow::SamplerConfig::uniform_iid(double(n), 1), r);
  medflow::Rng rng(2);
  std::vector<std::uint32_t> out;
  double c[2];
  for (auto _ : state) {
    c[0] = rng.uniform();
    c[1] = rng.uniform();
    cloud.neighbors_unsorted_into({c, 2}, r, 0.9 * r, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FixedRadiusQuery)->Arg(100000)->Arg(1000000)->Arg(10000000);
