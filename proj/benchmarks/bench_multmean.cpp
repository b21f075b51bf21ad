#include <benchmark/benchmark.h>

#include "multmean/halasz.hpp"
#include "multmean/heckeforms.hpp"
#include "multmean/multcore.hpp"
#include "multmean/primes.hpp"

using namespace multmean;

static void BM_SievePrimes(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sieve_primes(n).count());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SievePrimes)->RangeMultiplier(10)->Range(10'000, 10'000'000)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_Eta24Expand(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(eta24_expand(n).limit());
}
BENCHMARK(BM_Eta24Expand)->RangeMultiplier(10)->Range(1'000, 100'000)->Unit(benchmark::kMillisecond);

static void BM_SieveValuesMobius(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  const auto ps = sieve_primes(n);
  const MultSpec<double> mu{"mobius", [](std::uint64_t) { return -1.0; }, ZeroBeyondFirstPower{}};
  for (auto _ : state) benchmark::DoNotOptimize(sieve_values(mu, n, ps).limit());
}
BENCHMARK(BM_SieveValuesMobius)->RangeMultiplier(10)->Range(10'000, 1'000'000)->Unit(benchmark::kMillisecond);

static void BM_SieveValuesHecke(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  const auto ps = sieve_primes(n);
  const MultSpec<double> d{"divisor", [](std::uint64_t) { return 2.0; }, HeckeRecurrence::normalized()};
  for (auto _ : state) benchmark::DoNotOptimize(sieve_values(d, n, ps).limit());
}
BENCHMARK(BM_SieveValuesHecke)->RangeMultiplier(10)->Range(10'000, 1'000'000)->Unit(benchmark::kMillisecond);

static void BM_MinimizeLambda(benchmark::State& state) {
  const double x = static_cast<double>(state.range(0));
  const auto ps = sieve_primes(static_cast<std::uint64_t>(x));
  const PrimeFunction mu = [](std::uint64_t) { return Complex(-1, 0); };
  for (auto _ : state) benchmark::DoNotOptimize(minimize_lambda(ps, mu, 1.5, x, 10, default_grid_step(x), 40).lambda);
}
BENCHMARK(BM_MinimizeLambda)->RangeMultiplier(10)->Range(10'000, 1'000'000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
