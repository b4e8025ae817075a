#pragma once

#include <cstdint>
#include <string>

namespace bmi {

inline constexpr std::int64_t kSecondsPerDay = 86400;

// Day index since the Unix epoch (UTC). Timestamps are non-negative.
inline std::int64_t day_index(std::int64_t ts) { return ts / kSecondsPerDay; }

inline std::int64_t day_start(std::int64_t day) { return day * kSecondsPerDay; }

// Fractional hour of day in [0,24).
inline double hour_of_day(std::int64_t ts) {
    return static_cast<double>(ts % kSecondsPerDay) / 3600.0;
}

// Civil-date conversion (proleptic Gregorian), days since 1970-01-01.
struct CivilDate {
    int year;
    unsigned month;
    unsigned day;
};

inline CivilDate civil_from_day(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {static_cast<int>(y + (m <= 2)), m, d};
}

inline std::int64_t day_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// "YYYY-MM-DD" for a day index.
std::string iso_date(std::int64_t day);

// Parses "YYYY-MM-DD"; returns false on malformed input.
bool parse_iso_date(const std::string& s, std::int64_t& day_out);

}  // namespace bmi
