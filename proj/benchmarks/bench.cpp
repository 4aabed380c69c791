#include <benchmark/benchmark.h>

#include <cstdint>

#include "fpp/certifier.hpp"
#include "fpp/combinatorics.hpp"
#include "fpp/distributions.hpp"
#include "fpp/engine.hpp"
#include "fpp/lattice.hpp"

namespace {

void BM_EdgeWeight(benchmark::State& state) {
  const auto spec = fpp::DistributionSpec::exponential(1.0);
  const auto d = static_cast<std::uint32_t>(state.range(0));
  auto v = fpp::Vertex::axis(d, 1, 3);
  std::uint32_t i = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fpp::edge_weight(fpp::EdgeKey::between(v, i, 1), 7, spec));
    i = i % d + 1;
  }
}
BENCHMARK(BM_EdgeWeight)->Arg(2)->Arg(100)->Arg(10000);

void BM_FirstPassageHyperplane(benchmark::State& state) {
  const auto spec = fpp::DistributionSpec::exponential(1.0);
  const auto d = static_cast<std::uint32_t>(state.range(0));
  const fpp::Target t = fpp::target::HyperplaneX1{state.range(1)};
  std::uint64_t seed = 1;
  std::uint64_t settled = 0;
  for (auto _ : state) {
    const auto s = fpp::first_passage(d, t, seed++, spec, fpp::SearchCaps{});
    settled += s.settled_count;
    benchmark::DoNotOptimize(s.value);
  }
  state.counters["settled/s"] = benchmark::Counter(static_cast<double>(settled), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_FirstPassageHyperplane)->Args({2, 20})->Args({8, 4})->Args({32, 3})->Unit(benchmark::kMillisecond);

void BM_AdmissibleA(benchmark::State& state) {
  const auto spec = fpp::DistributionSpec::exponential(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(fpp::admissible_A(268337, 0.764, 1e-3, spec).A);
}
BENCHMARK(BM_AdmissibleA);

void BM_OptimizeUpper(benchmark::State& state) {
  const auto spec = fpp::DistributionSpec::exponential(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(fpp::optimize_upper(268337, spec));
}
BENCHMARK(BM_OptimizeUpper)->Unit(benchmark::kMillisecond);

void BM_SawCount(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fpp::saw_count(n, 3));
}
BENCHMARK(BM_SawCount)->DenseRange(4, 8, 2)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
