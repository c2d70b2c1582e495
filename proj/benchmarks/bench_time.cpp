#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "chronoseries/timemath.hpp"
#include "chronoseries/timezone.hpp"

using namespace chronoseries;

namespace {

std::vector<std::int64_t> instants(std::size_t n) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> any(0, 2'000'000'000);
    std::vector<std::int64_t> out(n);
    for (auto& t : out) t = any(rng);
    return out;
}

}  // namespace

static void BM_OffsetAt(benchmark::State& state) {
    const auto zone = TimeZone::get("Europe/Rome");
    const auto ts = instants(4096);
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(zone->offset_at(ts[i++ & 4095]));
}
BENCHMARK(BM_OffsetAt);

static void BM_ToCivil(benchmark::State& state) {
    const auto ts = instants(4096);
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(to_civil(Timestamp{static_cast<double>(ts[i++ & 4095])}, "Europe/Rome"));
}
BENCHMARK(BM_ToCivil);

static void BM_ShiftCalendarMonth(benchmark::State& state) {
    const auto ts = instants(4096);
    const auto month = TimeUnit::parse("1M");
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(shift(Timestamp{static_cast<double>(ts[i++ & 4095])}, month, 1, "Europe/Rome"));
}
BENCHMARK(BM_ShiftCalendarMonth);
