#include <benchmark/benchmark.h>

#include "bench_support.hpp"
#include "chronoseries/io.hpp"

using namespace chronoseries;

static void BM_ReadCsvHumitemp(benchmark::State& state) {
    bench::quiet();
    const std::string bytes = io::read_file(bench::data_path("humitemp.csv"));
    for (auto _ : state) benchmark::DoNotOptimize(io::read_csv(bytes));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_ReadCsvHumitemp)->Unit(benchmark::kMillisecond);

static void BM_NativeRoundTrip(benchmark::State& state) {
    bench::quiet();
    const auto series = bench::irregular_points(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(io::read_native(io::write_native(series)));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NativeRoundTrip)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);
