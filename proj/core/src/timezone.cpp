#include "chronoseries/timezone.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <sstream>

#include "build_config.hpp"
#include "chronoseries/error.hpp"
#include "civil.hpp"

namespace chronoseries {

std::string_view tzdb_version() noexcept { return build::tzdb_version; }

namespace {

class ByteReader {
public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    bool has(std::size_t n) const noexcept { return pos_ + n <= bytes_.size(); }

    void require(std::size_t n, const std::string& zone) const {
        if (!has(n)) throw Error(ErrorCode::timezone, "truncated TZif data for time zone '" + zone + "'");
    }

    std::uint8_t u8() { return static_cast<std::uint8_t>(bytes_[pos_++]); }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
        return v;
    }

    std::int64_t i64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | u8();
        return static_cast<std::int64_t>(v);
    }

    void skip(std::size_t n) { pos_ += n; }
    std::size_t position() const noexcept { return pos_; }
    std::string_view rest() const noexcept { return bytes_.substr(pos_); }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

struct Counts {
    std::uint32_t isut, isstd, leap, time, type, chars;
};

Counts read_header(ByteReader& in, const std::string& zone, char& version) {
    in.require(44, zone);
    if (in.u8() != 'T' || in.u8() != 'Z' || in.u8() != 'i' || in.u8() != 'f') {
        throw Error(ErrorCode::timezone, "not a TZif file for time zone '" + zone + "'");
    }
    version = static_cast<char>(in.u8());
    in.skip(15);
    Counts c{};
    c.isut = in.u32();
    c.isstd = in.u32();
    c.leap = in.u32();
    c.time = in.u32();
    c.type = in.u32();
    c.chars = in.u32();
    if (c.type == 0) throw Error(ErrorCode::timezone, "TZif data without local time types for '" + zone + "'");
    return c;
}

// POSIX TZ text helpers. They return false on malformed input.
bool parse_name(std::string_view& s) {
    if (s.empty()) return false;
    if (s.front() == '<') {
        auto close = s.find('>');
        if (close == std::string_view::npos) return false;
        s.remove_prefix(close + 1);
        return true;
    }
    std::size_t n = 0;
    while (n < s.size() && ((s[n] >= 'A' && s[n] <= 'Z') || (s[n] >= 'a' && s[n] <= 'z'))) ++n;
    if (n < 3) return false;
    s.remove_prefix(n);
    return true;
}

bool parse_number(std::string_view& s, int& value) {
    std::size_t n = 0;
    value = 0;
    while (n < s.size() && s[n] >= '0' && s[n] <= '9') value = value * 10 + (s[n++] - '0');
    if (n == 0) return false;
    s.remove_prefix(n);
    return true;
}

// [+-]hh[:mm[:ss]] as signed seconds
bool parse_hms(std::string_view& s, std::int32_t& seconds) {
    int sign = 1;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        sign = s.front() == '-' ? -1 : 1;
        s.remove_prefix(1);
    }
    int h = 0, m = 0, sec = 0;
    if (!parse_number(s, h)) return false;
    if (!s.empty() && s.front() == ':') {
        s.remove_prefix(1);
        if (!parse_number(s, m)) return false;
        if (!s.empty() && s.front() == ':') {
            s.remove_prefix(1);
            if (!parse_number(s, sec)) return false;
        }
    }
    seconds = sign * (h * 3600 + m * 60 + sec);
    return true;
}

}  // namespace

std::optional<PosixRule> PosixRule::parse(std::string_view text) {
    PosixRule rule;
    std::string_view s = text;
    if (!parse_name(s)) return std::nullopt;
    std::int32_t std_west = 0;
    if (!parse_hms(s, std_west)) return std::nullopt;
    rule.std_offset_ = -std_west;
    rule.dst_offset_ = rule.std_offset_;
    if (s.empty()) return rule;

    if (!parse_name(s)) return std::nullopt;
    rule.has_dst_ = true;
    rule.dst_offset_ = rule.std_offset_ + 3600;
    if (!s.empty() && s.front() != ',') {
        std::int32_t dst_west = 0;
        if (!parse_hms(s, dst_west)) return std::nullopt;
        rule.dst_offset_ = -dst_west;
    }
    auto parse_date = [&s](Date& date) {
        if (s.empty() || s.front() != ',') return false;
        s.remove_prefix(1);
        if (s.empty()) return false;
        if (s.front() == 'M') {
            s.remove_prefix(1);
            date.form = Date::Form::month_week_day;
            if (!parse_number(s, date.month) || s.empty() || s.front() != '.') return false;
            s.remove_prefix(1);
            if (!parse_number(s, date.week) || s.empty() || s.front() != '.') return false;
            s.remove_prefix(1);
            if (!parse_number(s, date.day)) return false;
            if (date.month < 1 || date.month > 12 || date.week < 1 || date.week > 5 || date.day > 6) return false;
        } else if (s.front() == 'J') {
            s.remove_prefix(1);
            date.form = Date::Form::julian_no_leap;
            if (!parse_number(s, date.day) || date.day < 1 || date.day > 365) return false;
        } else {
            date.form = Date::Form::zero_based;
            if (!parse_number(s, date.day) || date.day > 365) return false;
        }
        date.time = 7200;
        if (!s.empty() && s.front() == '/') {
            s.remove_prefix(1);
            if (!parse_hms(s, date.time)) return false;
        }
        return true;
    };
    if (s.empty()) {
        // US defaults when no rule is given.
        rule.start_ = Date{Date::Form::month_week_day, 0, 2, 3, 7200};
        rule.end_ = Date{Date::Form::month_week_day, 0, 1, 11, 7200};
        return rule;
    }
    if (!parse_date(rule.start_) || !parse_date(rule.end_) || !s.empty()) return std::nullopt;
    return rule;
}

std::int64_t PosixRule::transition_local(const Date& date, std::int64_t year) {
    std::int64_t day = 0;
    switch (date.form) {
    case Date::Form::julian_no_leap: {
        day = detail::days_from_civil(year, 1, 1) + date.day - 1;
        if (detail::is_leap(year) && date.day >= 60) ++day;
        break;
    }
    case Date::Form::zero_based:
        day = detail::days_from_civil(year, 1, 1) + date.day;
        break;
    case Date::Form::month_week_day: {
        const std::int64_t first = detail::days_from_civil(year, date.month, 1);
        // POSIX weekday: 0 = Sunday
        const int first_weekday = static_cast<int>(detail::floor_mod(first + 4, 7));
        std::int64_t d = first + detail::floor_mod(date.day - first_weekday, 7) + 7 * (date.week - 1);
        const std::int64_t month_end = first + detail::days_in_month(year, date.month);
        while (d >= month_end) d -= 7;
        day = d;
        break;
    }
    }
    return day * 86400 + date.time;
}

std::int32_t PosixRule::offset_at(std::int64_t utc_seconds) const {
    if (!has_dst_) return std_offset_;
    const std::int64_t year = detail::civil_from_days(detail::floor_div(utc_seconds + std_offset_, 86400)).year;
    const std::int64_t start = transition_local(start_, year) - std_offset_;
    const std::int64_t end = transition_local(end_, year) - dst_offset_;
    bool in_dst = false;
    if (start < end) {
        in_dst = utc_seconds >= start && utc_seconds < end;
    } else {
        in_dst = !(utc_seconds >= end && utc_seconds < start);
    }
    return in_dst ? dst_offset_ : std_offset_;
}

std::shared_ptr<const TimeZone> TimeZone::from_tzif(std::string name, std::string_view bytes) {
    auto zone = std::make_shared<TimeZone>();
    zone->name_ = std::move(name);
    ByteReader in(bytes);
    char version = 0;
    Counts counts = read_header(in, zone->name_, version);

    const bool wide = version >= '2';
    if (wide) {
        // Skip the 32-bit block; the 64-bit block follows with its own header.
        const std::size_t v1_size = counts.time * 5ull + counts.type * 6ull + counts.chars +
                                    counts.leap * 8ull + counts.isstd + counts.isut;
        in.require(v1_size, zone->name_);
        in.skip(v1_size);
        char ignored = 0;
        counts = read_header(in, zone->name_, ignored);
    }
    const std::size_t time_size = wide ? 8 : 4;
    const std::size_t block = counts.time * (time_size + 1) + counts.type * 6ull + counts.chars +
                              counts.leap * (time_size + 4) + counts.isstd + counts.isut;
    in.require(block, zone->name_);

    zone->transitions_.reserve(counts.time);
    for (std::uint32_t i = 0; i < counts.time; ++i) {
        zone->transitions_.push_back(wide ? in.i64() : static_cast<std::int32_t>(in.u32()));
    }
    zone->transition_types_.reserve(counts.time);
    for (std::uint32_t i = 0; i < counts.time; ++i) {
        const std::uint8_t type = in.u8();
        if (type >= counts.type) throw Error(ErrorCode::timezone, "corrupt TZif transition table for '" + zone->name_ + "'");
        zone->transition_types_.push_back(type);
    }
    for (std::uint32_t i = 0; i < counts.type; ++i) {
        Type type;
        type.offset = static_cast<std::int32_t>(in.u32());
        type.is_dst = in.u8() != 0;
        in.u8();  // abbreviation index
        zone->types_.push_back(type);
    }
    in.skip(counts.chars + counts.leap * (time_size + 4) + counts.isstd + counts.isut);

    if (wide) {
        std::string_view rest = in.rest();
        if (rest.size() >= 2 && rest.front() == '\n') {
            rest.remove_prefix(1);
            const auto newline = rest.find('\n');
            if (newline != std::string_view::npos && newline > 0) {
                zone->footer_ = PosixRule::parse(rest.substr(0, newline));
            }
        }
    }
    return zone;
}

std::int32_t TimeZone::offset_at(std::int64_t utc_seconds) const {
    if (transitions_.empty()) {
        return footer_ ? footer_->offset_at(utc_seconds) : types_.front().offset;
    }
    if (utc_seconds < transitions_.front()) return types_.front().offset;
    if (utc_seconds >= transitions_.back() && footer_) return footer_->offset_at(utc_seconds);
    const auto it = std::upper_bound(transitions_.begin(), transitions_.end(), utc_seconds);
    const auto index = static_cast<std::size_t>(std::distance(transitions_.begin(), it)) - 1;
    return types_[transition_types_[index]].offset;
}

std::int64_t TimeZone::local_to_utc(std::int64_t local_seconds) const {
    // Real zones never change offset twice within a day, so the offsets one day
    // either side cover every candidate.
    const std::int32_t before = offset_at(local_seconds - 86400 - 50400);
    const std::int32_t after = offset_at(local_seconds + 86400 + 50400);
    const bool before_ok = offset_at(local_seconds - before) == before;
    const bool after_ok = offset_at(local_seconds - after) == after;
    if (before_ok && after_ok) return std::min(local_seconds - before, local_seconds - after);
    if (before_ok) return local_seconds - before;
    if (after_ok) return local_seconds - after;
    // Gap: use the offset in force before the transition, which lands past it.
    return local_seconds - before;
}

std::shared_ptr<const TimeZone> TimeZone::get(std::string_view name) {
    static std::mutex mutex;
    static std::map<std::string, std::shared_ptr<const TimeZone>, std::less<>> cache;

    std::lock_guard lock(mutex);
    if (auto it = cache.find(name); it != cache.end()) return it->second;

    const std::string key(name);
    if (key.empty() || key.front() == '/' || key.find("..") != std::string::npos) {
        throw Error(ErrorCode::timezone, "unknown time zone '" + key + "'");
    }
    const char* env_dir = std::getenv("TZDIR");
    const std::filesystem::path dir = (env_dir && *env_dir) ? env_dir : build::default_tzdir;
    const std::filesystem::path path = dir / key;

    std::shared_ptr<const TimeZone> zone;
    std::ifstream file(path, std::ios::binary);
    if (file && std::filesystem::is_regular_file(path)) {
        std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
        zone = from_tzif(key, bytes);
    } else if (key == "UTC" || key == "Etc/UTC" || key == "GMT") {
        auto utc = std::make_shared<TimeZone>();
        utc->name_ = key;
        utc->types_.push_back(Type{0, false});
        zone = utc;
    } else {
        throw Error(ErrorCode::timezone, "unknown time zone '" + key + "'");
    }
    cache.emplace(key, zone);
    return zone;
}

}  // namespace chronoseries
