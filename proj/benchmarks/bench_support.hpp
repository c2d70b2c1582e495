#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "chronoseries/log.hpp"
#include "chronoseries/series.hpp"

namespace chronoseries::bench {

inline std::filesystem::path data_path(const char* name) { return std::filesystem::path(CHRONOSERIES_BENCH_DATA) / name; }

/// Silences the library log for the lifetime of the benchmark process.
inline void quiet() { set_log_level(spdlog::level::warn); }

/// Irregular two-label point series, roughly `step` seconds apart.
inline TimeSeries irregular_points(std::size_t n, double step = 600.0, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(0.5 * step, 1.5 * step);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto builder = TimeSeries::Builder::points({"temperature", "humidity"});
    double t = 1'546'300'800.0;
    for (std::size_t i = 0; i < n; ++i) {
        builder.append(Timestamp{t}, {20.0 + noise(rng), 45.0 + 3.0 * noise(rng)});
        t += jitter(rng);
    }
    return std::move(builder).build();
}

}  // namespace chronoseries::bench
