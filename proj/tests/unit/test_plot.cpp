#include <cmath>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "chronoseries/error.hpp"
#include "chronoseries/io.hpp"
#include "chronoseries/plot.hpp"
#include "html_checks.hpp"
#include "test_support.hpp"

using namespace chronoseries;
using namespace chronoseries::testing;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

std::string island_text(const std::string& html) {
    const std::string open = "<script type=\"application/json\" id=\"chronoseries-data\">";
    const auto from = html.find(open);
    REQUIRE(from != std::string::npos);
    const auto to = html.find("</script>", from);
    // The "<\/" escapes are valid JSON for "</".
    return html.substr(from + open.size(), to - from - open.size());
}

}  // namespace

TEST_CASE("aggregation factor is the smallest power of ten that fits") {
    CHECK(plot::aggregation_factor(10000, 10000) == 1);
    CHECK(plot::aggregation_factor(10001, 10000) == 10);
    CHECK(plot::aggregation_factor(14000, 10000) == 10);
    CHECK(plot::aggregation_factor(100000, 10000) == 10);
    CHECK(plot::aggregation_factor(100001, 10000) == 100);
    CHECK(plot::aggregation_factor(5, 1) == 10);
    CHECK_THROWS_AS(plot::aggregation_factor(5, 0), Error);
}

TEST_CASE("prepare buckets values with min/max bands") {
    const LogCapture log;
    Rng rng(31);
    for (int instance = 0; instance < 200; ++instance) {
        const auto n = static_cast<std::size_t>(integer(rng, 1, 3000));
        const auto series = random_points(rng, n, 2);
        const auto max_points = static_cast<std::size_t>(integer(rng, 1, 500));
        const auto spec = plot::prepare(series, max_points);
        const std::size_t f = spec.factor;
        CHECK((n + f - 1) / f <= max_points);
        CHECK((f == 1 || (n + f / 10 - 1) / (f / 10) > max_points));
        REQUIRE(spec.size() == (n + f - 1) / f);
        for (const auto& trace : spec.labels) {
            REQUIRE(trace.values.size() == spec.size());
            if (f == 1) {
                CHECK(trace.band_min.empty());
                continue;
            }
            for (std::size_t b = 0; b < spec.size(); ++b) {
                CHECK(trace.band_min[b] <= trace.values[b]);
                CHECK(trace.values[b] <= trace.band_max[b]);
            }
        }
        for (const auto& index : spec.indexes) {
            for (const auto& v : index.values) {
                if (v) CHECK((*v >= 0.0 && *v <= 1.0));
            }
        }
    }
}

TEST_CASE("band invariant holds under adversarial rounding") {
    // Nearly equal large values make the plain mean fall outside [min, max].
    auto builder = TimeSeries::Builder::points({"v"});
    const double big = 1e16 + 2.0;
    for (int i = 0; i < 30; ++i) builder.append(Timestamp{60.0 * i}, {i % 3 == 0 ? big : std::nextafter(big, 0.0)});
    const LogCapture log;
    const auto spec = plot::prepare(std::move(builder).build(), 2);
    for (std::size_t b = 0; b < spec.size(); ++b) {
        CHECK(spec.labels[0].band_min[b] <= spec.labels[0].values[b]);
        CHECK(spec.labels[0].values[b] <= spec.labels[0].band_max[b]);
    }
}

TEST_CASE("index buckets: mean, anomaly max, null when absent") {
    auto builder = TimeSeries::Builder::points({"v"});
    builder.append(Timestamp{0}, {1.0}, DataIndexes{{"data_loss", 0.2}, {"anomaly", 0.1}});
    builder.append(Timestamp{60}, {2.0}, DataIndexes{{"data_loss", 0.4}, {"anomaly", 0.9}});
    for (int i = 2; i < 20; ++i) builder.append(Timestamp{60.0 * i}, {1.0 * i});
    const LogCapture log;
    const auto spec = plot::prepare(std::move(builder).build(), 2);
    REQUIRE(spec.factor == 10);
    CHECK(log.contains("Aggregating by \"10\" for improved plotting"));
    for (const auto& index : spec.indexes) {
        if (index.name == "data_loss") CHECK(index.values[0] == doctest::Approx(0.3));
        if (index.name == "anomaly") CHECK(index.values[0] == 0.9);
        CHECK_FALSE(index.values[1].has_value());
    }
    CHECK(spec.starts[1].epoch == 600.0);
    CHECK(spec.ends[1].epoch == 1140.0);
}

TEST_CASE("label selection") {
    const auto series = periodic_points(10, 5, 3600.0, {"a", "b"});
    CHECK(plot::prepare(series, 100, std::vector<std::string>{"b"}).labels.size() == 1);
    CHECK_THROWS_AS(plot::prepare(series, 100, std::vector<std::string>{}), Error);
    CHECK_THROWS_AS(plot::prepare(series, 100, std::vector<std::string>{"zzz"}), Error);
    CHECK_THROWS_AS(plot::prepare(series.slice(0, 0)), Error);
}

TEST_CASE("HTML output is self-contained and embeds the data island") {
    auto builder = TimeSeries::Builder::points({"</script><script>alert(1)</script>", "b"}, "Europe/Rome");
    for (int i = 0; i < 50; ++i) builder.append(Timestamp{3600.0 * i}, {1.0 * i, -1.0 * i}, DataIndexes{{"data_loss", 0.0}});
    const auto series = std::move(builder).build();
    const auto spec = plot::prepare(series);
    const std::string html = plot::html(spec, "<title> & \"quotes\"");
    CHECK(html.rfind("<!DOCTYPE html>", 0) == 0);
    CHECK(count(html, "<script") == 2);
    CHECK(count(html, "</script>") == 2);
    CHECK(external_references(html) == 0);
    CHECK(html.find("&lt;title&gt; &amp; &quot;quotes&quot;") != std::string::npos);
    CHECK(html.find("id=\"chronoseries-chart\"") != std::string::npos);

    const auto island = nlohmann::ordered_json::parse(island_text(html));
    CHECK(island == plot::island(spec));
    CHECK(island["version"] == "chronoseries-plot v1");
    CHECK(island["tz"] == "Europe/Rome");
    CHECK(island["kind"] == "points");
    CHECK(island["factor"] == 1);
    CHECK(island["timestamps"][1] == 3600000.0);
    CHECK(island["labels"][0] == "</script><script>alert(1)</script>");
    CHECK(island["bands"].empty());
    CHECK(island["indexes"]["data_loss"].size() == 50);
}

TEST_CASE("island keys follow the documented schema") {
    const LogCapture log;
    const auto spec = plot::prepare(periodic_points(25, 5), 10);
    const auto island = plot::island(spec);
    std::vector<std::string> keys;
    for (const auto& [key, value] : island.items()) keys.push_back(key);
    CHECK(keys == std::vector<std::string>{"version", "tz", "kind", "factor", "timestamps", "ends", "labels", "values", "bands", "indexes"});
    CHECK(island["bands"]["value"]["min"].size() == 3);
    CHECK(island["ends"][2] == (1'546'300'800.0 + 24 * 3600.0) * 1000.0);
}

TEST_CASE("SVG and PNG images") {
    const LogCapture log;
    auto series = periodic_points(24 * 5, 24, 3600.0, {"a<b", "c"});
    const auto spec = plot::prepare(series);
    const std::string svg = plot::svg(spec, {640, 300});
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"300\"", 0) == 0);
    CHECK(svg.find("a&lt;b") != std::string::npos);
    CHECK(count(svg, "http") == 1);
    const auto png = plot::png(spec, {640, 300});
    REQUIRE(png.size() > 33);
    CHECK(std::string(png.begin(), png.begin() + 8) == "\x89PNG\r\n\x1a\n");
    auto be32 = [&](std::size_t at) { return (png[at] << 24) | (png[at + 1] << 16) | (png[at + 2] << 8) | png[at + 3]; };
    CHECK(be32(16) == 640);
    CHECK(be32(20) == 300);
    CHECK(plot::png(spec, {640, 300}) == png);
    CHECK_THROWS_AS(plot::png(spec, {0, 300}), Error);
}

TEST_CASE("time ticks fall on local wall-clock boundaries") {
    const char* rome = "Europe/Rome";
    const Timestamp first{1553900000.0};  // around the 2019 spring-forward change
    const Timestamp last{first.epoch + 3 * 86400.0};
    const auto ticks = plot::time_ticks(first, last, rome);
    REQUIRE(!ticks.empty());
    CHECK(ticks.size() <= 8);
    for (const auto& tick : ticks) {
        const CivilTime c = to_civil(tick.t, rome);
        CHECK(c.minute == 0);
        CHECK(c.second == 0.0);
        CHECK(tick.t >= first);
        CHECK(tick.t <= last);
        CHECK_FALSE(tick.label.empty());
    }
    const auto yearly = plot::time_ticks(Timestamp{0}, Timestamp{40 * 365.25 * 86400.0}, "UTC");
    for (const auto& tick : yearly) {
        const CivilTime c = to_civil(tick.t, "UTC");
        CHECK(c.month == 1);
        CHECK(c.day == 1);
    }
}
