#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chronoseries {

/// Version tag of the IANA database the library was configured against (e.g. "2026c").
std::string_view tzdb_version() noexcept;

/// A POSIX TZ rule ("CET-1CEST,M3.5.0,M10.5.0/3"), used past the last explicit
/// transition of a TZif file.
class PosixRule {
public:
    static std::optional<PosixRule> parse(std::string_view text);

    /// UTC offset in seconds in effect at `utc_seconds`.
    std::int32_t offset_at(std::int64_t utc_seconds) const;

private:
    struct Date {
        enum class Form { julian_no_leap, zero_based, month_week_day } form = Form::month_week_day;
        int day = 0;
        int week = 0;
        int month = 0;
        std::int32_t time = 7200;
    };

    static std::int64_t transition_local(const Date& date, std::int64_t year);

    std::int32_t std_offset_ = 0;
    std::int32_t dst_offset_ = 0;
    bool has_dst_ = false;
    Date start_;
    Date end_;
};

/// An IANA time zone loaded from a compiled TZif file.
///
/// Instances are immutable; get() caches them process-wide and is safe to call
/// from several threads.
class TimeZone {
public:
    /// Resolve an IANA name ("Europe/Rome", "UTC"). Throws Error{timezone} for
    /// unknown names. The database directory is $TZDIR when set.
    static std::shared_ptr<const TimeZone> get(std::string_view name);

    /// Parse TZif bytes directly (versions 1 to 4).
    static std::shared_ptr<const TimeZone> from_tzif(std::string name, std::string_view bytes);

    const std::string& name() const noexcept { return name_; }

    std::int32_t offset_at(std::int64_t utc_seconds) const;

    /// Map a wall-clock instant (seconds since 1970-01-01 local) to UTC.
    /// Ambiguous instants take the earlier UTC offset choice, i.e. the first
    /// occurrence; instants inside a gap are pushed forward by the gap width.
    std::int64_t local_to_utc(std::int64_t local_seconds) const;

private:
    struct Type {
        std::int32_t offset = 0;
        bool is_dst = false;
    };

    std::string name_;
    std::vector<std::int64_t> transitions_;
    std::vector<std::uint8_t> transition_types_;
    std::vector<Type> types_;
    std::optional<PosixRule> footer_;
};

}  // namespace chronoseries
