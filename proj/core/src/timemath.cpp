#include "chronoseries/timemath.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "chronoseries/error.hpp"
#include "chronoseries/timezone.hpp"
#include "civil.hpp"

namespace chronoseries {

namespace {

struct Split {
    std::int64_t whole;
    double fraction;
};

Split split_seconds(double seconds) {
    const double whole = std::floor(seconds);
    return Split{static_cast<std::int64_t>(whole), seconds - whole};
}

char suffix_of(UnitKind kind) {
    switch (kind) {
    case UnitKind::seconds: return 's';
    case UnitKind::minutes: return 'm';
    case UnitKind::hours: return 'h';
    case UnitKind::days: return 'D';
    case UnitKind::weeks: return 'W';
    case UnitKind::months: return 'M';
    case UnitKind::years: return 'Y';
    }
    return '?';
}

}  // namespace

TimeUnit TimeUnit::parse(std::string_view text) {
    const std::string token(text);
    if (text.size() < 2) throw Error(ErrorCode::parse_error, "malformed time unit '" + token + "'");
    UnitKind kind{};
    switch (text.back()) {
    case 's': kind = UnitKind::seconds; break;
    case 'm': kind = UnitKind::minutes; break;
    case 'h': kind = UnitKind::hours; break;
    case 'D': kind = UnitKind::days; break;
    case 'W': kind = UnitKind::weeks; break;
    case 'M': kind = UnitKind::months; break;
    case 'Y': kind = UnitKind::years; break;
    default:
        throw Error(ErrorCode::parse_error, "unknown time unit suffix in '" + token + "' (expected one of s m h D W M Y)");
    }
    const std::string_view digits = text.substr(0, text.size() - 1);
    std::int64_t count = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), count);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.front() == '-' || digits.front() == '+') {
        throw Error(ErrorCode::parse_error, "malformed time unit count in '" + token + "'");
    }
    if (count <= 0) throw Error(ErrorCode::parse_error, "time unit count must be positive in '" + token + "'");
    return TimeUnit(count, kind);
}

double TimeUnit::seconds() const {
    switch (kind_) {
    case UnitKind::seconds: return static_cast<double>(count_);
    case UnitKind::minutes: return static_cast<double>(count_) * 60.0;
    case UnitKind::hours: return static_cast<double>(count_) * 3600.0;
    default:
        throw Error(ErrorCode::invalid_argument, "calendar unit '" + str() + "' has no fixed length");
    }
}

std::string TimeUnit::str() const { return std::to_string(count_) + suffix_of(kind_); }

CivilTime to_civil(Timestamp t, std::string_view tz) {
    const auto zone = TimeZone::get(tz);
    const Split s = split_seconds(t.epoch);
    const std::int32_t offset = zone->offset_at(s.whole);
    const std::int64_t local = s.whole + offset;
    const std::int64_t days = detail::floor_div(local, 86400);
    const std::int64_t secs = local - days * 86400;
    const detail::Date date = detail::civil_from_days(days);
    CivilTime civil;
    civil.year = date.year;
    civil.month = date.month;
    civil.day = date.day;
    civil.hour = static_cast<int>(secs / 3600);
    civil.minute = static_cast<int>((secs % 3600) / 60);
    civil.second = static_cast<double>(secs % 60) + s.fraction;
    civil.utc_offset = offset;
    return civil;
}

namespace {

Timestamp resolve(const TimeZone& zone, std::int64_t days, std::int64_t seconds_of_day, double fraction) {
    const std::int64_t local = days * 86400 + seconds_of_day;
    return Timestamp{static_cast<double>(zone.local_to_utc(local)) + fraction};
}

}  // namespace

Timestamp from_civil(const CivilTime& civil, std::string_view tz) {
    const auto zone = TimeZone::get(tz);
    const Split s = split_seconds(civil.second);
    const std::int64_t days = detail::days_from_civil(civil.year, civil.month, civil.day);
    return resolve(*zone, days, civil.hour * 3600 + civil.minute * 60 + s.whole, s.fraction);
}

std::string format_timestamp(Timestamp t, std::string_view tz) {
    const CivilTime c = to_civil(t, tz);
    const std::int32_t abs_offset = c.utc_offset < 0 ? -c.utc_offset : c.utc_offset;
    const char sign = c.utc_offset < 0 ? '-' : '+';
    const double whole = std::floor(c.second);
    std::string seconds = fmt::format("{:02d}", static_cast<int>(whole));
    if (c.second != whole) {
        std::string frac = fmt::format("{:.6f}", c.second - whole).substr(1);
        while (frac.back() == '0') frac.pop_back();
        seconds += frac;
    }
    return fmt::format("{:04d}-{:02d}-{:02d} {:02d}:{:02d}:{} {}{:02d}:{:02d}", c.year, c.month, c.day, c.hour,
                       c.minute, seconds, sign, abs_offset / 3600, (abs_offset % 3600) / 60);
}

Timestamp shift(Timestamp anchor, const TimeUnit& unit, std::int64_t n, std::string_view tz) {
    if (unit.is_physical()) {
        const auto zone = TimeZone::get(tz);  // validates the zone name
        (void)zone;
        return Timestamp{anchor.epoch + static_cast<double>(n) * unit.seconds()};
    }
    const auto zone = TimeZone::get(tz);
    const Split s = split_seconds(anchor.epoch);
    const std::int64_t local = s.whole + zone->offset_at(s.whole);
    std::int64_t days = detail::floor_div(local, 86400);
    const std::int64_t seconds_of_day = local - days * 86400;
    const std::int64_t steps = n * unit.count();
    switch (unit.kind()) {
    case UnitKind::days: days += steps; break;
    case UnitKind::weeks: days += 7 * steps; break;
    case UnitKind::months:
    case UnitKind::years: {
        const detail::Date date = detail::civil_from_days(days);
        std::int64_t month_index = date.year * 12 + (date.month - 1);
        month_index += unit.kind() == UnitKind::months ? steps : 12 * steps;
        const std::int64_t year = detail::floor_div(month_index, 12);
        const int month = static_cast<int>(detail::floor_mod(month_index, 12)) + 1;
        const int day = std::min(date.day, detail::days_in_month(year, month));
        days = detail::days_from_civil(year, month, day);
        break;
    }
    default: break;
    }
    return resolve(*zone, days, seconds_of_day, s.fraction);
}

double duration_at(const TimeUnit& unit, Timestamp anchor, std::string_view tz) {
    return shift(anchor, unit, 1, tz) - anchor;
}

Timestamp floor(Timestamp anchor, const TimeUnit& unit, std::string_view tz) {
    const auto zone = TimeZone::get(tz);
    if (unit.is_physical()) {
        const double width = unit.seconds();
        return Timestamp{std::floor(anchor.epoch / width) * width};
    }
    const Split s = split_seconds(anchor.epoch);
    const std::int64_t local = s.whole + zone->offset_at(s.whole);
    std::int64_t days = detail::floor_div(local, 86400);
    const std::int64_t count = unit.count();
    switch (unit.kind()) {
    case UnitKind::days:
        days -= detail::floor_mod(days, count);
        break;
    case UnitKind::weeks: {
        const std::int64_t monday = days - detail::iso_weekday(days);
        // 1970-01-05 is the first Monday after the epoch.
        const std::int64_t week_index = detail::floor_div(monday - 4, 7);
        days = monday - 7 * detail::floor_mod(week_index, count);
        break;
    }
    case UnitKind::months: {
        const detail::Date date = detail::civil_from_days(days);
        const std::int64_t month_index = date.year * 12 + (date.month - 1);
        const std::int64_t aligned = month_index - detail::floor_mod(month_index, count);
        days = detail::days_from_civil(detail::floor_div(aligned, 12), static_cast<int>(detail::floor_mod(aligned, 12)) + 1, 1);
        break;
    }
    case UnitKind::years: {
        const detail::Date date = detail::civil_from_days(days);
        const std::int64_t year = date.year - detail::floor_mod(date.year, count);
        days = detail::days_from_civil(year, 1, 1);
        break;
    }
    default: break;
    }
    Timestamp boundary = resolve(*zone, days, 0, 0.0);
    // Midnight inside a gap resolves forward; it can only overshoot when the
    // anchor itself precedes the resolved instant.
    if (boundary > anchor) boundary = shift(boundary, unit, -1, tz);
    return boundary;
}

std::int64_t steps_between(Timestamp from, Timestamp to, const TimeUnit& unit, std::string_view tz) {
    if (unit.is_physical()) {
        return static_cast<std::int64_t>(std::llround((to - from) / unit.seconds()));
    }
    const CivilTime a = to_civil(from, tz);
    const CivilTime b = to_civil(to, tz);
    const std::int64_t day_a = detail::days_from_civil(a.year, a.month, a.day);
    const std::int64_t day_b = detail::days_from_civil(b.year, b.month, b.day);
    const double fa = a.hour * 3600.0 + a.minute * 60.0 + a.second;
    const double fb = b.hour * 3600.0 + b.minute * 60.0 + b.second;
    const double day_steps = static_cast<double>(day_b - day_a) + (fb - fa) / 86400.0;
    switch (unit.kind()) {
    case UnitKind::days: return std::llround(day_steps / static_cast<double>(unit.count()));
    case UnitKind::weeks: return std::llround(day_steps / (7.0 * static_cast<double>(unit.count())));
    case UnitKind::months: {
        const double months = static_cast<double>((b.year - a.year) * 12 + (b.month - a.month)) +
                              (static_cast<double>(b.day - a.day) + (fb - fa) / 86400.0) / 31.0;
        return std::llround(months / static_cast<double>(unit.count()));
    }
    case UnitKind::years: {
        const double years = static_cast<double>(b.year - a.year) +
                             (static_cast<double>(b.month - a.month) * 31.0 + (b.day - a.day)) / 372.0;
        return std::llround(years / static_cast<double>(unit.count()));
    }
    default: return 0;
    }
}

}  // namespace chronoseries
