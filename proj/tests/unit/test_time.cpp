#include <chrono>
#include <sstream>
#include <string>

#include <doctest.h>

#include "chronoseries/error.hpp"
#include "chronoseries/io.hpp"
#include "chronoseries/timemath.hpp"
#include "chronoseries/timezone.hpp"
#include "test_support.hpp"

using namespace chronoseries;
using chronoseries::testing::data_path;

namespace {

Timestamp wall(int y, int mo, int d, int h, int mi, int s, const char* tz) {
    return from_civil(CivilTime{y, mo, d, h, mi, static_cast<double>(s), 0}, tz);
}

}  // namespace

TEST_CASE("TimeUnit grammar") {
    CHECK(TimeUnit::parse("1h") == TimeUnit(1, UnitKind::hours));
    CHECK(TimeUnit::parse("15m") == TimeUnit(15, UnitKind::minutes));
    CHECK(TimeUnit::parse("1D").is_calendar());
    CHECK(TimeUnit::parse("2W") == TimeUnit(2, UnitKind::weeks));
    CHECK(TimeUnit::parse("3M") == TimeUnit(3, UnitKind::months));
    CHECK(TimeUnit::parse("1Y").kind() == UnitKind::years);
    CHECK(TimeUnit::parse("10s").seconds() == 10.0);
    CHECK(TimeUnit::parse("24h").seconds() == 86400.0);
    CHECK(TimeUnit::parse("15m").str() == "15m");
    for (const char* bad : {"", "h", "0h", "-1h", "1x", "1.5h", "1 h", "1hh", "1d"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(TimeUnit::parse(bad), Error);
    }
    CHECK_THROWS_AS(TimeUnit::parse("1D").seconds(), Error);
}

TEST_CASE("UTC civil conversion agrees with std::chrono") {
    chronoseries::testing::Rng rng(11);
    for (int i = 0; i < 5000; ++i) {
        const auto epoch = chronoseries::testing::integer(rng, -5'000'000'000LL, 8'000'000'000LL);
        const CivilTime c = to_civil(Timestamp{static_cast<double>(epoch)}, "UTC");
        const std::chrono::sys_seconds sys{std::chrono::seconds{epoch}};
        const auto day = std::chrono::floor<std::chrono::days>(sys);
        const std::chrono::year_month_day ymd{day};
        const auto tod = epoch - day.time_since_epoch().count() * 86400LL;
        CAPTURE(epoch);
        REQUIRE(c.year == static_cast<int>(ymd.year()));
        REQUIRE(c.month == static_cast<int>(static_cast<unsigned>(ymd.month())));
        REQUIRE(c.day == static_cast<int>(static_cast<unsigned>(ymd.day())));
        REQUIRE(c.hour * 3600 + c.minute * 60 + static_cast<int>(c.second) == tod);
        REQUIRE(from_civil(c, "UTC").epoch == static_cast<double>(epoch));
    }
}

TEST_CASE("zone offsets match the reference table") {
    // Generated independently from the system IANA database; covers pre-1970
    // history, explicit transitions and the POSIX footer past 2037.
    std::istringstream lines(io::read_file(data_path("tz_offsets.csv")));
    std::string line;
    std::getline(lines, line);
    int rows = 0;
    while (std::getline(lines, line)) {
        const auto fields = io::split_csv_line(line, ',');
        REQUIRE(fields.size() == 4);
        const std::string& zone = fields[0];
        const auto epoch = std::stoll(fields[1]);
        const auto offset = std::stoi(fields[2]);
        CAPTURE(line);
        CHECK(TimeZone::get(zone)->offset_at(epoch) == offset);
        CHECK(format_timestamp(Timestamp{static_cast<double>(epoch)}, zone).substr(0, 19) == fields[3]);
        ++rows;
    }
    CHECK(rows == 1500);
}

TEST_CASE("POSIX TZ rules") {
    auto rule = PosixRule::parse("CET-1CEST,M3.5.0,M10.5.0/3");
    REQUIRE(rule);
    CHECK(rule->offset_at(1553994000 - 1) == 3600);  // 2019-03-31 00:59:59 UTC
    CHECK(rule->offset_at(1553994000) == 7200);
    CHECK(rule->offset_at(1572138000 - 1) == 7200);  // 2019-10-27 00:59:59 UTC
    CHECK(rule->offset_at(1572138000) == 3600);
    auto fixed = PosixRule::parse("<+0530>-5:30");
    REQUIRE(fixed);
    CHECK(fixed->offset_at(0) == 19800);
    CHECK_FALSE(PosixRule::parse("CET-1CEST,M13.5.0,M10.5.0"));
    CHECK_FALSE(PosixRule::parse(""));
}

TEST_CASE("unknown zones are rejected") {
    CHECK_THROWS_AS(TimeZone::get("Mars/Olympus_Mons"), Error);
    CHECK_THROWS_AS(TimeZone::get("../../etc/passwd"), Error);
    CHECK_THROWS_AS(TimeZone::from_tzif("bad", "not a tzif file"), Error);
}

TEST_CASE("local times in DST gaps and folds") {
    // 02:30 does not exist on 2019-03-31 in Rome: pushed forward by the gap.
    CHECK(wall(2019, 3, 31, 2, 30, 0, "Europe/Rome") == wall(2019, 3, 31, 3, 30, 0, "Europe/Rome"));
    // 02:30 happens twice on 2019-10-27: the first occurrence (CEST) wins.
    const Timestamp fold = wall(2019, 10, 27, 2, 30, 0, "Europe/Rome");
    CHECK(fold.epoch == 1572136200.0);
    CHECK(to_civil(fold, "Europe/Rome").utc_offset == 7200);
}

TEST_CASE("calendar durations across DST") {
    const char* rome = "Europe/Rome";
    const auto day = TimeUnit::parse("1D");
    const auto h24 = TimeUnit::parse("24h");
    CHECK(duration_at(day, wall(2019, 3, 31, 0, 0, 0, rome), rome) == 82800.0);
    CHECK(duration_at(day, wall(2019, 10, 27, 0, 0, 0, rome), rome) == 90000.0);
    CHECK(duration_at(day, wall(2019, 6, 1, 0, 0, 0, rome), rome) == 86400.0);
    CHECK(duration_at(h24, wall(2019, 3, 31, 0, 0, 0, rome), rome) == 86400.0);
    CHECK(duration_at(h24, wall(2019, 10, 27, 0, 0, 0, rome), rome) == 86400.0);
    // "1D" keeps the wall-clock time of day, "24h" does not.
    const Timestamp noon = wall(2019, 3, 30, 12, 0, 0, rome);
    CHECK(to_civil(shift(noon, day, 1, rome), rome).hour == 12);
    CHECK(to_civil(shift(noon, h24, 1, rome), rome).hour == 13);
    CHECK(duration_at(TimeUnit::parse("1M"), wall(2019, 2, 1, 0, 0, 0, "UTC"), "UTC") == 28 * 86400.0);
    CHECK(duration_at(TimeUnit::parse("1Y"), wall(2020, 1, 1, 0, 0, 0, "UTC"), "UTC") == 366 * 86400.0);
}

TEST_CASE("month shifts clamp to the end of the month") {
    const auto month = TimeUnit::parse("1M");
    const Timestamp jan31 = wall(2019, 1, 31, 10, 0, 0, "UTC");
    const CivilTime feb = to_civil(shift(jan31, month, 1, "UTC"), "UTC");
    CHECK(feb.month == 2);
    CHECK(feb.day == 28);
    CHECK(to_civil(shift(wall(2020, 1, 31, 0, 0, 0, "UTC"), month, 1, "UTC"), "UTC").day == 29);
    CHECK(to_civil(shift(jan31, month, -2, "UTC"), "UTC").month == 11);
    const CivilTime leap = to_civil(shift(wall(2020, 2, 29, 0, 0, 0, "UTC"), TimeUnit::parse("1Y"), 1, "UTC"), "UTC");
    CHECK(leap.month == 2);
    CHECK(leap.day == 28);
}

TEST_CASE("floor aligns to local boundaries") {
    const char* rome = "Europe/Rome";
    const Timestamp t = wall(2019, 10, 27, 15, 42, 7, rome);
    CHECK(floor(t, TimeUnit::parse("1D"), rome) == wall(2019, 10, 27, 0, 0, 0, rome));
    CHECK(floor(t, TimeUnit::parse("1W"), rome) == wall(2019, 10, 21, 0, 0, 0, rome));  // Monday
    CHECK(floor(t, TimeUnit::parse("1M"), rome) == wall(2019, 10, 1, 0, 0, 0, rome));
    CHECK(floor(t, TimeUnit::parse("1Y"), rome) == wall(2019, 1, 1, 0, 0, 0, rome));
    CHECK(floor(t, TimeUnit::parse("1h"), rome).epoch == 1572184800.0);
    CHECK(floor(Timestamp{-1.0}, TimeUnit::parse("1h"), "UTC").epoch == -3600.0);
}

TEST_CASE("steps_between counts wall-clock steps") {
    const char* rome = "Europe/Rome";
    const auto day = TimeUnit::parse("1D");
    CHECK(steps_between(wall(2019, 3, 30, 0, 0, 0, rome), wall(2019, 4, 2, 0, 0, 0, rome), day, rome) == 3);
    CHECK(steps_between(wall(2019, 1, 1, 0, 0, 0, rome), wall(2019, 12, 1, 0, 0, 0, rome), TimeUnit::parse("1M"), rome) == 11);
    CHECK(steps_between(Timestamp{0}, Timestamp{7200}, TimeUnit::parse("1h"), "UTC") == 2);
    chronoseries::testing::Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        const Timestamp a{static_cast<double>(chronoseries::testing::integer(rng, 0, 2'000'000'000))};
        const auto n = chronoseries::testing::integer(rng, -400, 400);
        CHECK(steps_between(a, shift(a, day, n, rome), day, rome) == n);
    }
}

TEST_CASE("timestamp formatting") {
    CHECK(format_timestamp(Timestamp{1546477200.0}, "UTC") == "2019-01-03 01:00:00 +00:00");
    CHECK(format_timestamp(Timestamp{1546477200.0}, "Europe/Rome") == "2019-01-03 02:00:00 +01:00");
    CHECK(format_timestamp(Timestamp{0.5}, "UTC") == "1970-01-01 00:00:00.5 +00:00");
    CHECK(format_timestamp(Timestamp{0}, "Asia/Kolkata") == "1970-01-01 05:30:00 +05:30");
}
