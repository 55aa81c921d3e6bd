#include <benchmark/benchmark.h>

#include "cmj/model.hpp"
#include "cmj/sim.hpp"
#include "cmj/stats.hpp"

namespace {

cmj::StopCondition capped(std::int64_t individuals) {
  cmj::StopCondition stop;
  stop.max_individuals = static_cast<std::uint64_t>(individuals);
  return stop;
}

void BM_batch_serial(benchmark::State& state) {
  const auto params = cmj::validate(2.0, 0.5, 0.5);
  const auto stop = capped(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmj::replicate_batch_serial(params, 1, static_cast<std::size_t>(state.range(0)), stop));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_batch_parallel(benchmark::State& state) {
  const auto params = cmj::validate(2.0, 0.5, 0.5);
  const auto stop = capped(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmj::replicate_batch(params, 1, static_cast<std::size_t>(state.range(0)), stop));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_single_trace(benchmark::State& state) {
  const auto params = cmj::validate(2.0, 0.5, 0.5);
  const auto stop = capped(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    // Survivors only, so every iteration reaches the cap.
    auto trace = cmj::simulate(params, seed++, stop);
    while (trace.stop_reason == cmj::StopReason::Extinction) trace = cmj::simulate(params, seed++, stop);
    benchmark::DoNotOptimize(trace.events.data());
  }
}

void BM_pool_survivors(benchmark::State& state) {
  const auto params = cmj::validate(2.0, 0.5, 0.5);
  const auto stop = capped(20000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmj::pool_survivors(params, 1, static_cast<std::size_t>(state.range(0)), stop));
  }
}

}  // namespace

BENCHMARK(BM_batch_serial)->Args({256, 1000})->Args({64, 20000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_batch_parallel)->Args({256, 1000})->Args({64, 20000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_single_trace)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pool_survivors)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
