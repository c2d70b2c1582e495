#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace chronoseries {

/// Seconds since 1970-01-01T00:00:00 UTC; fractional seconds allowed.
struct Timestamp {
    double epoch = 0.0;

    constexpr Timestamp() = default;
    constexpr explicit Timestamp(double seconds) : epoch(seconds) {}

    friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
    friend constexpr double operator-(Timestamp a, Timestamp b) { return a.epoch - b.epoch; }
    friend constexpr Timestamp operator+(Timestamp a, double seconds) { return Timestamp{a.epoch + seconds}; }
    friend constexpr Timestamp operator-(Timestamp a, double seconds) { return Timestamp{a.epoch - seconds}; }
};

enum class UnitKind { seconds, minutes, hours, days, weeks, months, years };

/// A span of time. Seconds, minutes and hours are physical (fixed length);
/// days, weeks, months and years are calendar units whose length depends on
/// where they start and in which time zone.
class TimeUnit {
public:
    constexpr TimeUnit(std::int64_t count, UnitKind kind) : count_(count), kind_(kind) {}

    /// Parses `<positive integer><suffix>`, suffix one of s m h D W M Y.
    static TimeUnit parse(std::string_view text);

    std::int64_t count() const noexcept { return count_; }
    UnitKind kind() const noexcept { return kind_; }

    bool is_physical() const noexcept {
        return kind_ == UnitKind::seconds || kind_ == UnitKind::minutes || kind_ == UnitKind::hours;
    }
    bool is_calendar() const noexcept { return !is_physical(); }

    /// Length in seconds; throws for calendar units.
    double seconds() const;

    /// Canonical spelling, e.g. "1h", "15m", "1D".
    std::string str() const;

    friend bool operator==(const TimeUnit&, const TimeUnit&) = default;

private:
    std::int64_t count_;
    UnitKind kind_;
};

/// Broken-down wall-clock time.
struct CivilTime {
    std::int64_t year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    double second = 0.0;
    std::int32_t utc_offset = 0;
};

CivilTime to_civil(Timestamp t, std::string_view tz);

/// Resolve a wall-clock time in `tz` (the utc_offset field is ignored).
Timestamp from_civil(const CivilTime& civil, std::string_view tz);

/// "2019-01-03 01:00:00 +00:00"; fractional seconds are printed only when present.
std::string format_timestamp(Timestamp t, std::string_view tz);

/// Physical length of `unit` when it starts at `anchor` in `tz`.
double duration_at(const TimeUnit& unit, Timestamp anchor, std::string_view tz);

/// Move `anchor` by `n` units. Calendar units move the wall-clock fields and
/// resolve back to an instant, so "1D" keeps the local time of day across DST.
/// Month/year moves clamp the day to the end of the target month.
Timestamp shift(Timestamp anchor, const TimeUnit& unit, std::int64_t n, std::string_view tz);

/// Largest unit boundary not after `anchor`. Physical units align to epoch
/// multiples; days, weeks (Monday), months and years align to local midnight.
Timestamp floor(Timestamp anchor, const TimeUnit& unit, std::string_view tz);

/// Nearest whole number of `unit` steps from `from` to `to` on the wall clock of `tz`.
std::int64_t steps_between(Timestamp from, Timestamp to, const TimeUnit& unit, std::string_view tz);

}  // namespace chronoseries
