#include <benchmark/benchmark.h>

#include "bench_support.hpp"
#include "chronoseries/transform.hpp"

using namespace chronoseries;

static void BM_Resample(benchmark::State& state) {
    bench::quiet();
    const auto series = bench::irregular_points(static_cast<std::size_t>(state.range(0)));
    const auto unit = TimeUnit::parse("1h");
    for (auto _ : state) benchmark::DoNotOptimize(resample(series, unit));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Resample)->RangeMultiplier(10)->Range(1'000, 1'000'000)->Unit(benchmark::kMillisecond);

static void BM_AggregateCalendarDays(benchmark::State& state) {
    bench::quiet();
    const auto series = bench::irregular_points(static_cast<std::size_t>(state.range(0))).change_tz("Europe/Rome");
    const auto unit = TimeUnit::parse("1D");
    const std::vector<AggregateOp> ops{AggregateOp::min, AggregateOp::max, AggregateOp::avg};
    for (auto _ : state) benchmark::DoNotOptimize(aggregate(series, unit, ops));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AggregateCalendarDays)->RangeMultiplier(10)->Range(1'000, 1'000'000)->Unit(benchmark::kMillisecond);
