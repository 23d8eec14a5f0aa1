#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace odmforge::core {

/// Calendar day as days since 1970-01-01 (UTC).
using Date = std::int32_t;

/// Instant at minute precision as minutes since 1970-01-01T00:00 UTC.
using Minute = std::int64_t;

constexpr int kMinutesPerDay = 1440;

struct Ymd {
    int year;
    unsigned month; // 1..12
    unsigned day;   // 1..31
};

Date days_from_civil(int year, unsigned month, unsigned day);
Ymd civil_from_days(Date days);

/// ISO day of week: 0 = Monday .. 6 = Sunday.
inline int weekday(Date day) noexcept {
    return static_cast<int>(((day % 7) + 7 + 3) % 7);
}

inline bool is_weekend(Date day) noexcept { return weekday(day) >= 5; }

inline Date minute_to_date(Minute m) noexcept {
    Minute d = m >= 0 ? m / kMinutesPerDay : (m - (kMinutesPerDay - 1)) / kMinutesPerDay;
    return static_cast<Date>(d);
}

inline Minute date_to_minute(Date d) noexcept {
    return static_cast<Minute>(d) * kMinutesPerDay;
}

struct IsoWeek {
    int year;      // ISO week-based year
    unsigned week; // 1..53

    friend bool operator==(const IsoWeek&, const IsoWeek&) = default;
    friend auto operator<=>(const IsoWeek&, const IsoWeek&) = default;
};

IsoWeek iso_week(Date day);

/// Monday of the given ISO week.
Date iso_week_monday(IsoWeek week);

std::string format_date(Date day);                 // YYYY-MM-DD
std::string format_minute(Minute m);               // YYYY-MM-DDTHH:MM
std::string format_iso_week(IsoWeek week);         // GGGG-Www

Date parse_date(std::string_view text);

/// Parses an ISO-8601 timestamp at minute precision. Seconds, when present,
/// must be zero. A trailing "Z" or "+HH:MM"/"-HH:MM" offset is normalised
/// to UTC; a bare timestamp is taken as UTC.
Minute parse_minute(std::string_view text);

IsoWeek parse_iso_week(std::string_view text);

/// Current wall-clock time formatted as an ISO-8601 UTC timestamp.
std::string now_utc_iso();

/// Current wall-clock UTC date.
Date today_utc();

} // namespace odmforge::core
