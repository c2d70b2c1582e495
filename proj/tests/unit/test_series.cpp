#include <doctest.h>

#include "chronoseries/error.hpp"
#include "chronoseries/series.hpp"
#include "test_support.hpp"

using namespace chronoseries;

TEST_CASE("data indexes are range checked and distinguish absent from zero") {
    DataIndexes indexes;
    CHECK_FALSE(indexes.has("data_loss"));
    indexes.set("data_loss", 0.0);
    CHECK(indexes.get("data_loss") == 0.0);
    CHECK_THROWS_AS(indexes.set("anomaly", 1.5), Error);
    CHECK_THROWS_AS(indexes.set("anomaly", -0.1), Error);
    CHECK_THROWS_AS(indexes.set("anomaly", std::nan("")), Error);
    indexes.set("anomaly", 1.0);
    CHECK(indexes.size() == 2);
    indexes.erase("data_loss");
    CHECK_FALSE(indexes.has("data_loss"));
}

TEST_CASE("builder enforces ordering and homogeneity") {
    auto builder = TimeSeries::Builder::points({"a", "b"});
    builder.append(DataTimePoint{Timestamp{10}, {{"b", 2.0}, {"a", 1.0}}, {}});
    CHECK_THROWS_AS(builder.append(DataTimePoint{Timestamp{10}, {{"a", 1.0}, {"b", 2.0}}, {}}), Error);
    CHECK_THROWS_AS(builder.append(DataTimePoint{Timestamp{5}, {{"a", 1.0}, {"b", 2.0}}, {}}), Error);
    CHECK_THROWS_AS(builder.append(DataTimePoint{Timestamp{20}, {{"a", 1.0}}, {}}), Error);
    CHECK_THROWS_AS(builder.append(DataTimePoint{Timestamp{20}, {{"a", 1.0}, {"c", 2.0}}, {}}), Error);
    CHECK_THROWS_AS(builder.append(Timestamp{20}, {1.0, std::nan("")}), Error);
    builder.append(Timestamp{20}, {3.0, 4.0});
    const auto series = std::move(builder).build();
    REQUIRE(series.size() == 2);
    CHECK(series.value(0, "a") == 1.0);
    CHECK(series.value(0, "b") == 2.0);
    CHECK(series.at(-1).data == std::vector<double>{3.0, 4.0});
    CHECK(series.at(Timestamp{20}).data[0] == 3.0);
    CHECK_THROWS_AS(series.at(Timestamp{15}), Error);
    CHECK_THROWS_AS(series.at(2), Error);
    CHECK_THROWS_AS(series.label_position("c"), Error);
    CHECK_THROWS_AS(TimeSeries::Builder::points({"a", "a"}), Error);
    CHECK_THROWS_AS(TimeSeries::Builder::points({"a"}, "Nowhere/Land"), Error);
}

TEST_CASE("slots must be contiguous and match the unit") {
    const auto hour = TimeUnit::parse("1h");
    auto builder = TimeSeries::Builder::slots({"x"}, hour);
    builder.append(DataTimeSlot{Timestamp{0}, Timestamp{3600}, hour, {{"x", 1.0}}, {}});
    CHECK_THROWS_AS(builder.append(DataTimeSlot{Timestamp{7200}, Timestamp{10800}, hour, {{"x", 1.0}}, {}}), Error);
    CHECK_THROWS_AS(builder.append(DataTimeSlot{Timestamp{3600}, Timestamp{5400}, hour, {{"x", 1.0}}, {}}), Error);
    builder.append(DataTimeSlot{Timestamp{3600}, Timestamp{7200}, hour, {{"x", 2.0}}, {}});
    const auto series = std::move(builder).build();
    CHECK(series.is_slots());
    CHECK(series.resolution().unit == hour);

    // A calendar day slot across the spring-forward change is 23 hours long.
    const auto day = TimeUnit::parse("1D");
    auto rome = TimeSeries::Builder::slots({"x"}, day, "Europe/Rome");
    rome.append(DataTimeSlot{Timestamp{1553986800}, Timestamp{1553986800 + 82800}, day, {{"x", 1.0}}, {}});
    CHECK_THROWS_AS(rome.append(DataTimeSlot{Timestamp{1554069600}, Timestamp{1554069600 + 82800}, day, {{"x", 1.0}}, {}}), Error);
}

TEST_CASE("resolution detection") {
    CHECK(detect_resolution({Timestamp{0}, Timestamp{3600}, Timestamp{7200}}).unit == TimeUnit(1, UnitKind::hours));
    CHECK(detect_resolution({Timestamp{0}, Timestamp{600}, Timestamp{1200}}).unit == TimeUnit(10, UnitKind::minutes));
    CHECK(detect_resolution({Timestamp{0}, Timestamp{7}, Timestamp{14}}).unit == TimeUnit(7, UnitKind::seconds));
    const auto variable = detect_resolution({Timestamp{0}, Timestamp{60}, Timestamp{120}, Timestamp{200}, Timestamp{260}});
    CHECK(variable.variable());
    CHECK(variable.auto_interval == 60.0);
    CHECK_THROWS_AS(detect_resolution({Timestamp{0}}), Error);
}

TEST_CASE("select, slice and change_tz") {
    auto series = chronoseries::testing::periodic_points(48, 24, 3600.0, {"a", "b"});
    CHECK(series.resolution().unit == TimeUnit(1, UnitKind::hours));
    const auto b = series.select("b");
    CHECK(b.labels() == std::vector<std::string>{"b"});
    CHECK(b.at(3).data[0] == series.value(3, "b"));
    const auto middle = series.slice(10, 20);
    CHECK(middle.size() == 10);
    CHECK(middle.at(0) == series.at(10));
    CHECK(series.slice(-5, -1).size() == 4);
    CHECK(series.slice(series.at(10).start, series.at(20).start) == middle);
    CHECK(middle.resolution().unit == series.resolution().unit);
    const auto rome = series.change_tz("Europe/Rome");
    CHECK(rome.tz() == "Europe/Rome");
    CHECK(rome.elements() == series.elements());
    CHECK_FALSE(rome == series);
    CHECK_THROWS_AS(series.change_tz("Bogus/Zone"), Error);
}

TEST_CASE("summary line") {
    auto series = chronoseries::testing::periodic_points(3, 24);
    CHECK(series.summary() ==
          "Time series of #3 points at 1h resolution, from point @ 1546300800.0 (2019-01-01 00:00:00 +00:00) "
          "to point @ 1546308000.0 (2019-01-01 02:00:00 +00:00)");
}
