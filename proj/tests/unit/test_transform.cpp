#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "chronoseries/error.hpp"
#include "chronoseries/transform.hpp"
#include "coverage_oracle.hpp"
#include "test_support.hpp"

using namespace chronoseries;
using namespace chronoseries::testing;

namespace {

// Even-integer timestamps and interval so the one-second oracle grid is exact.
TimeSeries oracle_instance(Rng& rng, std::size_t n, double& interval) {
    const double losses[] = {0.0, 0.0, 0.25, 0.5, 1.0};
    auto builder = TimeSeries::Builder::points({"a", "b"});
    interval = static_cast<double>(2 * integer(rng, 1, 20));
    builder.resolution(Resolution{std::nullopt, interval});
    double t = static_cast<double>(2 * integer(rng, 0, 50));
    for (std::size_t i = 0; i < n; ++i) {
        DataIndexes indexes;
        if (coin(rng, 0.4)) indexes.set("data_loss", losses[integer(rng, 0, 4)]);
        if (coin(rng, 0.3)) indexes.set("anomaly", static_cast<double>(integer(rng, 0, 8)) / 8.0);
        builder.append(Timestamp{t}, {static_cast<double>(integer(rng, -50, 50)), static_cast<double>(integer(rng, 0, 9))},
                       std::move(indexes));
        t += static_cast<double>(2 * integer(rng, 1, 40));
    }
    return std::move(builder).build();
}

void compare(const Element& actual, const OracleWindow& expected) {
    CHECK(actual.indexes.get("data_loss") == expected.data_loss);
    for (std::size_t k = 0; k < expected.mean.size(); ++k) {
        CHECK(actual.data[k] == doctest::Approx(expected.mean[k]).epsilon(1e-12).scale(100.0));
    }
    std::size_t carried = 0;
    for (const auto& [name, value] : actual.indexes) {
        if (name == "data_loss") continue;
        ++carried;
        auto it = std::find_if(expected.indexes.begin(), expected.indexes.end(), [&](const auto& p) { return p.first == name; });
        REQUIRE(it != expected.indexes.end());
        CHECK(value == doctest::Approx(it->second).epsilon(1e-12));
    }
    CHECK(carried == expected.indexes.size());
}

}  // namespace

TEST_CASE("validity regions are centred and clipped at neighbour midpoints") {
    auto builder = TimeSeries::Builder::points({"v"});
    for (double t : {0.0, 10.0, 14.0, 60.0}) builder.append(Timestamp{t}, {1.0});
    const auto regions = validity_regions(std::move(builder).build(), 10.0);
    CHECK(regions[0].left == -5.0);
    CHECK(regions[0].right == 5.0);
    CHECK(regions[1].left == 5.0);
    CHECK(regions[1].right == 12.0);
    CHECK(regions[2].left == 12.0);
    CHECK(regions[2].right == 19.0);
    CHECK(regions[3].left == 55.0);
    CHECK(regions[3].right == 65.0);
}

TEST_CASE("resample matches the brute-force coverage oracle") {
    Rng rng(20240101);
    const LogCapture quiet;
    for (int instance = 0; instance < 300; ++instance) {
        double interval = 0.0;
        const auto series = oracle_instance(rng, static_cast<std::size_t>(integer(rng, 2, 20)), interval);
        const std::int64_t width = std::int64_t{1} << integer(rng, 1, 6);
        const auto interpolation = coin(rng) ? Interpolation::linear : Interpolation::nearest;
        const CoverageOracle oracle(series, interval, interpolation);
        const auto expected = oracle.resample(width);
        const auto actual = resample(series, TimeUnit(width, UnitKind::seconds), interpolation);
        CAPTURE(instance);
        REQUIRE(actual.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(actual.at(static_cast<std::ptrdiff_t>(i)).start.epoch == (expected[i].start + expected[i].end) / 2.0);
            compare(actual.at(static_cast<std::ptrdiff_t>(i)), expected[i]);
        }
    }
}

TEST_CASE("aggregate averages match the brute-force coverage oracle") {
    Rng rng(777);
    const LogCapture quiet;
    for (int instance = 0; instance < 300; ++instance) {
        double interval = 0.0;
        const auto series = oracle_instance(rng, static_cast<std::size_t>(integer(rng, 2, 20)), interval);
        const std::int64_t width = integer(rng, 1, 90);
        const CoverageOracle oracle(series, interval, Interpolation::linear);
        const auto expected = oracle.slots(width);
        const auto actual = aggregate(series, TimeUnit(width, UnitKind::seconds));
        CAPTURE(instance);
        REQUIRE(actual.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            const auto& slot = actual.at(static_cast<std::ptrdiff_t>(i));
            CHECK(slot.start.epoch == expected[i].start);
            CHECK(slot.end.epoch == expected[i].end);
            // Slot widths need not be powers of two, so data_loss sums may round.
            CHECK(*slot.indexes.get("data_loss") == doctest::Approx(expected[i].data_loss).epsilon(1e-12));
            for (std::size_t k = 0; k < 2; ++k) {
                CHECK(slot.data[k] == doctest::Approx(expected[i].mean[k]).epsilon(1e-12).scale(100.0));
            }
        }
    }
}

TEST_CASE("transform outputs keep data_loss within [0,1]") {
    Rng rng(99);
    const LogCapture quiet;
    const char* units[] = {"1m", "10m", "1h", "1D"};
    for (int instance = 0; instance < 400; ++instance) {
        const auto series = random_points(rng, static_cast<std::size_t>(integer(rng, 2, 200)), 2);
        const auto unit = TimeUnit::parse(units[integer(rng, 0, 3)]);
        const auto out = unit.is_physical() && coin(rng) ? resample(series, unit) : aggregate(series, unit, {AggregateOp::avg, AggregateOp::max});
        for (const auto& e : out) {
            const auto loss = e.indexes.get("data_loss");
            REQUIRE(loss);
            CHECK(*loss >= 0.0);
            CHECK(*loss <= 1.0);
        }
    }
}

TEST_CASE("windows with no usable data are fully lost") {
    const LogCapture quiet;
    auto builder = TimeSeries::Builder::points({"v"});
    builder.resolution(Resolution{TimeUnit(1, UnitKind::minutes), 60.0});
    for (int i = 0; i < 10; ++i) builder.append(Timestamp{60.0 * i}, {1.0 * i});
    for (int i = 20; i < 30; ++i) builder.append(Timestamp{60.0 * i}, {1.0 * i});
    for (int i = 30; i < 40; ++i) builder.append(Timestamp{60.0 * i}, {1.0 * i}, DataIndexes{{"data_loss", 1.0}});
    const auto out = resample(std::move(builder).build(), TimeUnit(1, UnitKind::minutes));
    for (const auto& e : out) {
        const double t = e.start.epoch;
        if ((t > 600 && t < 1140) || t >= 1800) {
            CHECK(e.indexes.get("data_loss") == 1.0);
        }
        if (t == 660) CHECK(e.data[0] == doctest::Approx(11.0));  // linear through the gap
    }
}

TEST_CASE("resampling aligned complete data is the identity") {
    const LogCapture quiet;
    Rng rng(3);
    for (int instance = 0; instance < 50; ++instance) {
        auto builder = TimeSeries::Builder::points({"a", "b"});
        const double step = 3600.0;
        const double start = step * static_cast<double>(integer(rng, 400'000, 500'000));
        for (int i = 0; i < 50; ++i) builder.append(Timestamp{start + step * i}, {uniform(rng, -5, 5), uniform(rng, 0, 1e6)});
        const auto series = std::move(builder).build();
        const auto out = resample(series, TimeUnit::parse("1h"));
        REQUIRE(out.size() == series.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto& e = out.elements()[i];
            CHECK(e.start == series.elements()[i].start);
            CHECK(e.data == series.elements()[i].data);
            CHECK(e.indexes.get("data_loss") == 0.0);
        }
    }
}

TEST_CASE("resample and aggregate log what they did") {
    const LogCapture log;
    auto series = periodic_points(48, 24, 600.0);
    const auto out = resample(series, TimeUnit::parse("1h"));
    CHECK(log.contains("Using auto-detected sampling interval: 600.0s"));
    CHECK(log.contains("Resampled 48 DataTimePoints in " + std::to_string(out.size()) + " DataTimePoints"));
    const auto slots = aggregate(series, TimeUnit::parse("1h"), {AggregateOp::min, AggregateOp::max, AggregateOp::sum});
    CHECK(log.contains("Aggregated 48 points in " + std::to_string(slots.size()) + " slots"));
    CHECK(slots.labels() == std::vector<std::string>{"value_min", "value_max", "value_sum"});
}

TEST_CASE("calendar aggregation across DST consumes 23 and 25 hourly points") {
    const LogCapture quiet;
    const char* rome = "Europe/Rome";
    auto builder = TimeSeries::Builder::points({"v"}, rome);
    const double first = 1553810400.0;  // 2019-03-29 00:00 +01:00
    for (int i = 0; i < 24 * 220; ++i) builder.append(Timestamp{first + 3600.0 * i}, {1.0});
    const auto series = std::move(builder).build();
    const auto days = aggregate(series, TimeUnit::parse("1D"));
    auto consumed = [&](const Element& slot) {
        return std::count_if(series.begin(), series.end(), [&](const Element& e) { return e.start >= slot.start && e.start < slot.end; });
    };
    const auto spring = from_civil(CivilTime{2019, 3, 31, 0, 0, 0, 0}, rome);
    const auto autumn = from_civil(CivilTime{2019, 10, 27, 0, 0, 0, 0}, rome);
    CHECK(consumed(days.at(spring)) == 23);
    CHECK(days.at(spring).end - days.at(spring).start == 82800.0);
    CHECK(consumed(days.at(autumn)) == 25);
    CHECK(days.at(autumn).end - days.at(autumn).start == 90000.0);
    const auto fixed = aggregate(series, TimeUnit::parse("24h"));
    for (const auto& slot : fixed) CHECK(slot.end - slot.start == 86400.0);
}

TEST_CASE("transform argument errors") {
    const LogCapture quiet;
    auto series = periodic_points(10, 5);
    CHECK_THROWS_AS(resample(series, TimeUnit::parse("1D")), Error);
    CHECK_THROWS_AS(aggregate(series, TimeUnit::parse("1h"), {}), Error);
    CHECK_THROWS_AS(resample(series.slice(0, 1), TimeUnit::parse("1h")), Error);
    const auto slots = aggregate(series, TimeUnit::parse("2h"));
    CHECK_THROWS_AS(aggregate(slots, TimeUnit::parse("4h")), Error);
    CHECK_THROWS_AS(parse_interpolation("cubic"), Error);
    CHECK_THROWS_AS(parse_aggregate_op("median"), Error);
}
