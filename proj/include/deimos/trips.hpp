#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "deimos/csv.hpp"
#include "deimos/errors.hpp"
#include "deimos/temporal.hpp"

namespace deimos {

/// One activity point derived from a trip endpoint.
struct PointRecord {
    double longitude = 0.0;
    double latitude = 0.0;
    civil_seconds timestamp = 0;
    std::int64_t weight = 1;
};

/// Column names and datetime layout of a trip CSV. Defaults match the
/// 2009 NYC TLC yellow-cab schema.
struct TripSchema {
    std::string pickup_datetime = "Trip_Pickup_DateTime";
    std::string pickup_longitude = "Start_Lon";
    std::string pickup_latitude = "Start_Lat";
    std::string dropoff_datetime = "Trip_Dropoff_DateTime";
    std::string dropoff_longitude = "End_Lon";
    std::string dropoff_latitude = "End_Lat";

    /// strftime-style layout; supported specifiers: %Y %m %d %H %M %S.
    std::string datetime_format = "%Y-%m-%d %H:%M:%S";

    /// Added to parsed timestamps. Lets UTC-stamped inputs be shifted
    /// into the analysis zone; 0 when timestamps are already local.
    int utc_offset_minutes = 0;
};

struct ParseStats {
    std::uint64_t rows_read = 0;
    std::uint64_t rows_rejected = 0;
    std::uint64_t points = 0;

    ParseStats& operator+=(const ParseStats& o) {
        rows_read += o.rows_read;
        rows_rejected += o.rows_rejected;
        points += o.points;
        return *this;
    }
};

namespace detail {

/// Parse a civil datetime according to a %Y/%m/%d/%H/%M/%S layout.
/// Returns wall-clock seconds since 1970-01-01 00:00:00.
inline std::optional<civil_seconds> parse_datetime(std::string_view s, std::string_view format) {
    int year = 1970;
    unsigned month = 1, day = 1, hour = 0, minute = 0, second = 0;
    std::size_t si = 0;
    auto read_uint = [&](unsigned& out, int max_digits) {
        std::size_t end = si;
        const std::size_t limit = std::min(s.size(), si + static_cast<std::size_t>(max_digits));
        while (end < limit && s[end] >= '0' && s[end] <= '9') ++end;
        if (end == si) return false;
        unsigned v = 0;
        std::from_chars(s.data() + si, s.data() + end, v);
        out = v;
        si = end;
        return true;
    };
    for (std::size_t fi = 0; fi < format.size(); ++fi) {
        if (format[fi] == '%') {
            if (fi + 1 >= format.size()) return std::nullopt;
            const char spec = format[++fi];
            unsigned v = 0;
            switch (spec) {
                case 'Y': {
                    if (!read_uint(v, 4)) return std::nullopt;
                    year = static_cast<int>(v);
                    break;
                }
                case 'm': if (!read_uint(month, 2)) return std::nullopt; break;
                case 'd': if (!read_uint(day, 2)) return std::nullopt; break;
                case 'H': if (!read_uint(hour, 2)) return std::nullopt; break;
                case 'M': if (!read_uint(minute, 2)) return std::nullopt; break;
                case 'S': if (!read_uint(second, 2)) return std::nullopt; break;
                case '%': {
                    if (si >= s.size() || s[si] != '%') return std::nullopt;
                    ++si;
                    break;
                }
                default: return std::nullopt; // unsupported specifier
            }
        } else {
            if (si >= s.size() || s[si] != format[fi]) return std::nullopt;
            ++si;
        }
    }
    if (si != s.size()) return std::nullopt;
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) return std::nullopt;
    if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
    return days_from_civil(year, month, day) * 86400 +
           static_cast<std::int64_t>(hour) * 3600 + minute * 60 + second;
}

inline std::optional<double> parse_double(std::string_view field) {
    field = strip_quotes(CsvReader::trim(field));
    if (field.empty()) return std::nullopt;
    double v = 0.0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size()) return std::nullopt;
    return v;
}

/// Resolved column indices for a TripSchema against a concrete header.
struct TripColumns {
    std::ptrdiff_t pickup_datetime, pickup_longitude, pickup_latitude;
    std::ptrdiff_t dropoff_datetime, dropoff_longitude, dropoff_latitude;
    std::size_t max_index;
};

inline TripColumns resolve_columns(const CsvReader& reader, const TripSchema& schema) {
    auto need = [&](const std::string& name) {
        const std::ptrdiff_t idx = reader.find_column(name);
        if (idx < 0)
            throw config_error("trips: column '" + name + "' not found in CSV header");
        return idx;
    };
    TripColumns c{need(schema.pickup_datetime), need(schema.pickup_longitude),
                  need(schema.pickup_latitude), need(schema.dropoff_datetime),
                  need(schema.dropoff_longitude), need(schema.dropoff_latitude), 0};
    c.max_index = static_cast<std::size_t>(
        std::max({c.pickup_datetime, c.pickup_longitude, c.pickup_latitude,
                  c.dropoff_datetime, c.dropoff_longitude, c.dropoff_latitude}));
    return c;
}

inline bool coordinates_valid(double lon, double lat) {
    return lon >= -180.0 && lon <= 180.0 && lat >= -90.0 && lat <= 90.0;
}

/// Parse one split row into its pickup/dropoff points. Any unparseable
/// or out-of-range field rejects the whole row.
inline bool parse_trip_row(const std::vector<std::string_view>& fields, const TripColumns& cols,
                           const TripSchema& schema, PointRecord& pickup, PointRecord& dropoff) {
    if (fields.size() <= cols.max_index) return false;
    const auto plon = parse_double(fields[cols.pickup_longitude]);
    const auto plat = parse_double(fields[cols.pickup_latitude]);
    const auto dlon = parse_double(fields[cols.dropoff_longitude]);
    const auto dlat = parse_double(fields[cols.dropoff_latitude]);
    if (!plon || !plat || !dlon || !dlat) return false;
    if (!coordinates_valid(*plon, *plat) || !coordinates_valid(*dlon, *dlat)) return false;
    const auto pt = parse_datetime(strip_quotes(CsvReader::trim(fields[cols.pickup_datetime])),
                                   schema.datetime_format);
    const auto dt = parse_datetime(strip_quotes(CsvReader::trim(fields[cols.dropoff_datetime])),
                                   schema.datetime_format);
    if (!pt || !dt) return false;
    const std::int64_t offset = static_cast<std::int64_t>(schema.utc_offset_minutes) * 60;
    pickup = {*plon, *plat, *pt + offset, 1};
    dropoff = {*dlon, *dlat, *dt + offset, 1};
    return true;
}

} // namespace detail

/// Stream trip records, invoking on_point for the pickup and dropoff of
/// every well-formed row. Malformed rows are counted, not fatal.
template <typename PointFn>
ParseStats scan_trip_records(std::istream& in, const TripSchema& schema, PointFn&& on_point) {
    CsvReader reader(in);
    const detail::TripColumns cols = detail::resolve_columns(reader, schema);
    ParseStats stats;
    std::vector<std::string_view> fields;
    bool split_ok = false;
    PointRecord pickup, dropoff;
    while (reader.next_row(fields, split_ok)) {
        ++stats.rows_read;
        if (!split_ok || !detail::parse_trip_row(fields, cols, schema, pickup, dropoff)) {
            ++stats.rows_rejected;
            continue;
        }
        on_point(pickup);
        on_point(dropoff);
        stats.points += 2;
    }
    return stats;
}

/// Materialize all points of a trip CSV: two PointRecords per row, each
/// with weight 1.
inline std::pair<std::vector<PointRecord>, ParseStats>
parse_trip_records(std::istream& in, const TripSchema& schema) {
    std::vector<PointRecord> points;
    ParseStats stats = scan_trip_records(in, schema, [&](const PointRecord& p) { points.push_back(p); });
    return {std::move(points), stats};
}

} // namespace deimos
