#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "medflow/medians.hpp"
#include "medflow/rng.hpp"

static void BM_PMedianSelect(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  medflow::Rng rng(7);
  std::vector<double> values(n);
  for (auto& v : values) v = rng.uniform();
  std::vector<double> scratch;
  for (auto _ : state) {
    benchmark::DoNotOptimize(medflow::p_median(values, 0.0, scratch));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PMedianSelect)->Arg(64)->Arg(512)->Arg(4096)->Arg(1 << 20);

static void BM_FullSortMedian(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  medflow::Rng rng(7);
  std::vector<double> values(n);
  for (auto& v : values) v = rng.uniform();
  std::vector<double> scratch;
  for (auto _ : state) {
    scratch = values;
    std::sort(scratch.begin(), scratch.end());
    benchmark::DoNotOptimize(scratch[(n - 1) / 2]);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FullSortMedian)->Arg(512)->Arg(4096)->Arg(1 << 20);
