#include "odmforge/core/time.hpp"

#include <cstdio>
#include <ctime>

#include "odmforge/core/error.hpp"

namespace odmforge::core {

// Day counting follows the civil-calendar algorithms in common use for
// proleptic Gregorian <-> day-number conversion.
Date days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);            // [0, 399]
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;  // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;           // [0, 146096]
    return static_cast<Date>(era * 146097 + static_cast<int>(doe) - 719468);
}

Ymd civil_from_days(Date z) {
    int zi = z + 719468;
    const int era = (zi >= 0 ? zi : zi - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(zi - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Ymd{y + (m <= 2), m, d};
}

IsoWeek iso_week(Date day) {
    // Week 1 is the week containing the first Thursday of the year.
    const Date thursday = day + (3 - weekday(day));
    const Ymd ymd = civil_from_days(thursday);
    const Date jan1 = days_from_civil(ymd.year, 1, 1);
    const unsigned week = static_cast<unsigned>((thursday - jan1) / 7) + 1;
    return IsoWeek{ymd.year, week};
}

Date iso_week_monday(IsoWeek week) {
    // January 4th is always inside ISO week 1.
    const Date jan4 = days_from_civil(week.year, 1, 4);
    const Date monday_w1 = jan4 - weekday(jan4);
    return monday_w1 + static_cast<Date>(7 * (week.week - 1));
}

std::string format_date(Date day) {
    const Ymd ymd = civil_from_days(day);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", ymd.year, ymd.month, ymd.day);
    return buf;
}

std::string format_minute(Minute m) {
    const Date day = minute_to_date(m);
    const int tod = static_cast<int>(m - date_to_minute(day));
    const Ymd ymd = civil_from_days(day);
    char buf[24];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d", ymd.year, ymd.month, ymd.day,
                  tod / 60, tod % 60);
    return buf;
}

std::string format_iso_week(IsoWeek week) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-W%02u", week.year, week.week);
    return buf;
}

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

} // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !all_digits(text.substr(0, 4)) || !all_digits(text.substr(5, 2)) ||
        !all_digits(text.substr(8, 2)))
        fail(Errc::malformed_row, "bad date '" + std::string(text) + "', expected YYYY-MM-DD");
    const int y = to_int(text.substr(0, 4));
    const unsigned m = static_cast<unsigned>(to_int(text.substr(5, 2)));
    const unsigned d = static_cast<unsigned>(to_int(text.substr(8, 2)));
    if (m < 1 || m > 12 || d < 1 || d > 31)
        fail(Errc::malformed_row, "bad date '" + std::string(text) + "'");
    return days_from_civil(y, m, d);
}

Minute parse_minute(std::string_view text) {
    const std::string original(text);
    auto bad = [&original]() -> Minute {
        fail(Errc::malformed_row, "bad timestamp '" + original + "'");
    };

    // Trailing UTC marker or numeric offset.
    int offset_minutes = 0;
    if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) {
        text.remove_suffix(1);
    } else if (text.size() > 6 && (text[text.size() - 6] == '+' || text[text.size() - 6] == '-')) {
        std::string_view off = text.substr(text.size() - 6);
        if (off[3] != ':' || !all_digits(off.substr(1, 2)) || !all_digits(off.substr(4, 2)))
            return bad();
        offset_minutes = to_int(off.substr(1, 2)) * 60 + to_int(off.substr(4, 2));
        if (off[0] == '-') offset_minutes = -offset_minutes;
        text.remove_suffix(6);
    }

    // Date and time separated by 'T' or a space.
    if (text.size() < 16) return bad();
    if (text[10] != 'T' && text[10] != ' ') return bad();
    const Date day = parse_date(text.substr(0, 10));
    std::string_view tod = text.substr(11);
    if (tod.size() == 8 && tod[5] == ':') {
        if (tod.substr(6) != "00")
            fail(Errc::malformed_row, "timestamp '" + original + "' has sub-minute precision");
        tod = tod.substr(0, 5);
    }
    if (tod.size() != 5 || tod[2] != ':' || !all_digits(tod.substr(0, 2)) ||
        !all_digits(tod.substr(3, 2)))
        return bad();
    const int hh = to_int(tod.substr(0, 2));
    const int mm = to_int(tod.substr(3, 2));
    if (hh > 23 || mm > 59) return bad();
    return date_to_minute(day) + hh * 60 + mm - offset_minutes;
}

IsoWeek parse_iso_week(std::string_view text) {
    if (text.size() != 8 || text[4] != '-' || (text[5] != 'W' && text[5] != 'w') ||
        !all_digits(text.substr(0, 4)) || !all_digits(text.substr(6, 2)))
        fail(Errc::malformed_row, "bad ISO week '" + std::string(text) + "', expected GGGG-Www");
    const IsoWeek week{to_int(text.substr(0, 4)), static_cast<unsigned>(to_int(text.substr(6, 2)))};
    if (week.week < 1 || week.week > 53)
        fail(Errc::malformed_row, "bad ISO week '" + std::string(text) + "'");
    return week;
}

std::string now_utc_iso() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

Date today_utc() {
    std::time_t t = std::time(nullptr);
    return static_cast<Date>(t / 86400);
}

} // namespace odmforge::core
