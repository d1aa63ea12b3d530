#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "deimos/errors.hpp"

namespace deimos {

/// Seconds since 1970-01-01 00:00:00 of the wall clock in the analysis
/// zone. No zone conversion is performed anywhere in the library; the
/// zone name is carried as metadata and timestamps are interpreted as
/// civil (local) time.
using civil_seconds = std::int64_t;

namespace detail {

// Proleptic Gregorian day number relative to 1970-01-01 (Howard
// Hinnant's days_from_civil).
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : static_cast<unsigned>(-9));
    y = static_cast<int>(yy + (m <= 2));
}

inline bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

inline unsigned days_in_month(int y, unsigned m) {
    static constexpr unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[m - 1];
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

} // namespace detail

/// Parse "YYYY-MM-DD" into a civil day number.
inline std::optional<std::int64_t> parse_civil_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    auto num = [](std::string_view t, auto& out) {
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
        return ec == std::errc() && p == t.data() + t.size();
    };
    if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) || !num(s.substr(8, 2), d))
        return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > detail::days_in_month(y, m)) return std::nullopt;
    return detail::days_from_civil(y, m, d);
}

inline std::string format_civil_date(std::int64_t day) {
    int y;
    unsigned m, d;
    detail::civil_from_days(day, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
    return buf;
}

enum class TimeUnit { day, hour };

inline std::string_view to_string(TimeUnit u) { return u == TimeUnit::day ? "day" : "hour"; }

inline std::optional<TimeUnit> parse_time_unit(std::string_view s) {
    if (s == "day") return TimeUnit::day;
    if (s == "hour") return TimeUnit::hour;
    return std::nullopt;
}

/// The temporal axis of an activity matrix: num_units consecutive units
/// of the given granularity starting at start_day. Units are half-open
/// intervals [t_j, t_{j+1}), so a timestamp exactly on a boundary
/// belongs to the later unit.
struct TemporalSpec {
    std::int64_t start_day = 0; // civil day number of the first unit
    std::int64_t num_units = 0; // k
    TimeUnit unit = TimeUnit::day;
    std::string timezone = "UTC"; // zone the civil timestamps are expressed in

    void validate() const {
        if (num_units < 1) throw argument_error("temporal: num_units must be at least 1");
    }

    /// Unit index for a timestamp, or nullopt when outside the window.
    std::optional<std::int64_t> unit_index(civil_seconds t) const {
        const std::int64_t day = detail::floor_div(t, 86400);
        std::int64_t j;
        if (unit == TimeUnit::day) {
            j = day - start_day;
        } else {
            const std::int64_t hour_of_day = detail::floor_div(t - day * 86400, 3600);
            j = (day - start_day) * 24 + hour_of_day;
        }
        if (j < 0 || j >= num_units) return std::nullopt;
        return j;
    }

    /// Human-readable label for a unit: "YYYY-MM-DD" for days,
    /// "YYYY-MM-DDTHH" for hours.
    std::string unit_label(std::int64_t j) const {
        if (unit == TimeUnit::day) return format_civil_date(start_day + j);
        const std::int64_t day = start_day + detail::floor_div(j, 24);
        const std::int64_t hour = j - detail::floor_div(j, 24) * 24;
        char buf[8];
        std::snprintf(buf, sizeof(buf), "T%02d", static_cast<int>(hour));
        return format_civil_date(day) + buf;
    }

    bool operator==(const TemporalSpec&) const = default;
};

} // namespace deimos
