#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deimos/container.hpp"
#include "deimos/errors.hpp"
#include "deimos/grid.hpp"
#include "deimos/sensors.hpp"
#include "deimos/temporal.hpp"
#include "deimos/trips.hpp"

namespace deimos {

/// Everything a full pipeline run needs. Loaded from a JSON document
/// (// comments allowed) and schema-validated: unknown keys, missing
/// required keys, and out-of-range values are configuration errors.
struct RunConfig {
    GridSpec grid;
    TemporalSpec temporal;                      // training window
    std::optional<TemporalSpec> validation_temporal;
    TripSchema schema;
    std::string train_trips;                    // path or glob, relative to the config file
    std::string validation_trips;               // empty when absent
    std::int64_t q_min = 1;
    std::int64_t q_max = 20;
    SelectionMethod method = SelectionMethod::deim;
    std::int64_t classes = 7;
    std::int64_t top_days = 10;
    std::string output_dir = "deimos-out";
    unsigned threads = 0; // 0 = hardware concurrency
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw config_error("config: unknown key '" + item.key() + "' in " + where);
    }
}

template <typename T>
T get_required(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key))
        throw config_error("config: missing required key '" + std::string(key) + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw config_error("config: key '" + std::string(key) + "' in " + where +
                           " has the wrong type");
    }
}

template <typename T>
T get_optional(const nlohmann::json& j, const char* key, const std::string& where, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw config_error("config: key '" + std::string(key) + "' in " + where +
                           " has the wrong type");
    }
}

inline GridSpec parse_grid_config(const nlohmann::json& j) {
    check_keys(j, {"min_longitude", "min_latitude", "cell_width_deg", "cell_height_deg",
                   "num_cols", "num_rows"}, "grid");
    GridSpec g;
    g.min_longitude = get_required<double>(j, "min_longitude", "grid");
    g.min_latitude = get_required<double>(j, "min_latitude", "grid");
    g.cell_width_deg = get_required<double>(j, "cell_width_deg", "grid");
    g.cell_height_deg = get_required<double>(j, "cell_height_deg", "grid");
    g.num_cols = get_required<std::int64_t>(j, "num_cols", "grid");
    g.num_rows = get_required<std::int64_t>(j, "num_rows", "grid");
    try {
        g.validate();
    } catch (const argument_error& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    if (g.min_longitude < -180.0 || g.min_longitude > 180.0 || g.min_latitude < -90.0 ||
        g.min_latitude > 90.0)
        throw config_error("config: grid origin outside valid coordinate ranges");
    return g;
}

inline TemporalSpec parse_temporal_config(const nlohmann::json& j, const std::string& where) {
    check_keys(j, {"start", "num_units", "unit", "timezone"}, where);
    TemporalSpec t;
    const auto start = get_required<std::string>(j, "start", where);
    const auto day = parse_civil_date(start);
    if (!day) throw config_error("config: " + where + ".start is not a YYYY-MM-DD date");
    t.start_day = *day;
    t.num_units = get_required<std::int64_t>(j, "num_units", where);
    const auto unit_name = get_optional<std::string>(j, "unit", where, "day");
    const auto unit = parse_time_unit(unit_name);
    if (!unit) throw config_error("config: " + where + ".unit must be 'day' or 'hour'");
    t.unit = *unit;
    t.timezone = get_optional<std::string>(j, "timezone", where, "UTC");
    try {
        t.validate();
    } catch (const argument_error& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    return t;
}

} // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    detail::check_keys(j, {"grid", "temporal", "validation_temporal", "trips", "sweep", "detect",
                           "output_dir", "threads"}, "config root");
    RunConfig c;
    if (!j.contains("grid")) throw config_error("config: missing required section 'grid'");
    c.grid = detail::parse_grid_config(j.at("grid"));
    if (!j.contains("temporal")) throw config_error("config: missing required section 'temporal'");
    c.temporal = detail::parse_temporal_config(j.at("temporal"), "temporal");
    if (j.contains("validation_temporal"))
        c.validation_temporal = detail::parse_temporal_config(j.at("validation_temporal"),
                                                              "validation_temporal");

    if (!j.contains("trips")) throw config_error("config: missing required section 'trips'");
    const nlohmann::json& trips = j.at("trips");
    detail::check_keys(trips, {"train", "validation", "columns", "datetime_format",
                               "utc_offset_minutes"}, "trips");
    c.train_trips = detail::get_required<std::string>(trips, "train", "trips");
    c.validation_trips = detail::get_optional<std::string>(trips, "validation", "trips", "");
    if (trips.contains("columns")) {
        const nlohmann::json& cols = trips.at("columns");
        detail::check_keys(cols, {"pickup_datetime", "pickup_longitude", "pickup_latitude",
                                  "dropoff_datetime", "dropoff_longitude", "dropoff_latitude"},
                           "trips.columns");
        auto& s = c.schema;
        s.pickup_datetime = detail::get_optional<std::string>(cols, "pickup_datetime",
                                                              "trips.columns", s.pickup_datetime);
        s.pickup_longitude = detail::get_optional<std::string>(cols, "pickup_longitude",
                                                               "trips.columns", s.pickup_longitude);
        s.pickup_latitude = detail::get_optional<std::string>(cols, "pickup_latitude",
                                                              "trips.columns", s.pickup_latitude);
        s.dropoff_datetime = detail::get_optional<std::string>(cols, "dropoff_datetime",
                                                               "trips.columns", s.dropoff_datetime);
        s.dropoff_longitude = detail::get_optional<std::string>(cols, "dropoff_longitude",
                                                                "trips.columns", s.dropoff_longitude);
        s.dropoff_latitude = detail::get_optional<std::string>(cols, "dropoff_latitude",
                                                               "trips.columns", s.dropoff_latitude);
    }
    c.schema.datetime_format = detail::get_optional<std::string>(trips, "datetime_format", "trips",
                                                                 c.schema.datetime_format);
    c.schema.utc_offset_minutes = detail::get_optional<int>(trips, "utc_offset_minutes", "trips",
                                                            c.schema.utc_offset_minutes);

    if (j.contains("sweep")) {
        const nlohmann::json& sweep = j.at("sweep");
        detail::check_keys(sweep, {"q_min", "q_max", "method"}, "sweep");
        c.q_min = detail::get_optional<std::int64_t>(sweep, "q_min", "sweep", c.q_min);
        c.q_max = detail::get_optional<std::int64_t>(sweep, "q_max", "sweep", c.q_max);
        const auto method_name = detail::get_optional<std::string>(sweep, "method", "sweep", "deim");
        const auto method = parse_selection_method(method_name);
        if (!method) throw config_error("config: sweep.method must be 'deim' or 'naive'");
        c.method = *method;
        if (c.q_min < 1 || c.q_min > c.q_max)
            throw config_error("config: require 1 <= sweep.q_min <= sweep.q_max");
    }
    if (j.contains("detect")) {
        const nlohmann::json& detect = j.at("detect");
        detail::check_keys(detect, {"classes", "top_days"}, "detect");
        c.classes = detail::get_optional<std::int64_t>(detect, "classes", "detect", c.classes);
        c.top_days = detail::get_optional<std::int64_t>(detect, "top_days", "detect", c.top_days);
        if (c.classes < 1) throw config_error("config: detect.classes must be at least 1");
        if (c.top_days < 0) throw config_error("config: detect.top_days must be non-negative");
    }
    c.output_dir = detail::get_optional<std::string>(j, "output_dir", "config root", c.output_dir);
    const auto threads = detail::get_optional<std::int64_t>(j, "threads", "config root", 0);
    if (threads < 0) throw config_error("config: threads must be non-negative");
    c.threads = static_cast<unsigned>(threads);
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config: '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

/// Expand a path-or-glob into sorted file paths. Wildcards (* and ?)
/// are supported in the final path component only. Relative patterns
/// resolve against base_dir.
inline std::vector<std::string> expand_glob(const std::string& pattern,
                                            const std::filesystem::path& base_dir) {
    namespace fs = std::filesystem;
    fs::path p(pattern);
    if (p.is_relative()) p = base_dir / p;
    const std::string name = p.filename().string();
    const fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
    if (dir.string().find_first_of("*?") != std::string::npos)
        throw config_error("glob: wildcards are only supported in the file name: '" + pattern + "'");
    if (name.find_first_of("*?") == std::string::npos) {
        if (!fs::exists(p)) throw config_error("input file does not exist: '" + p.string() + "'");
        return {p.string()};
    }
    // iterative wildcard match with backtracking on '*'
    auto matches = [](const std::string& text, const std::string& pat) {
        std::size_t t = 0, g = 0, star_pat = std::string::npos, star_text = 0;
        while (t < text.size()) {
            if (g < pat.size() && (pat[g] == '?' || pat[g] == text[t])) {
                ++t;
                ++g;
            } else if (g < pat.size() && pat[g] == '*') {
                star_pat = g++;
                star_text = t;
            } else if (star_pat != std::string::npos) {
                g = star_pat + 1;
                t = ++star_text;
            } else {
                return false;
            }
        }
        while (g < pat.size() && pat[g] == '*') ++g;
        return g == pat.size();
    };
    std::vector<std::string> out;
    if (!fs::is_directory(dir))
        throw config_error("glob: directory does not exist: '" + dir.string() + "'");
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && matches(entry.path().filename().string(), name))
            out.push_back(entry.path().string());
    std::sort(out.begin(), out.end());
    if (out.empty())
        throw config_error("glob: no files match '" + pattern + "'");
    return out;
}

/// Annotated configuration template emitted by the `init` subcommand.
inline std::string annotated_config_template() {
    return R"(// deimos run configuration.
// Comments are allowed; remove or edit values as needed.
{
  // Regular lon/lat grid. Cells are half-open boxes of
  // cell_width_deg x cell_height_deg starting at the origin;
  // cell ids are row-major (id = row * num_cols + col).
  "grid": {
    "min_longitude": -74.30,
    "min_latitude": 40.45,
    "cell_width_deg": 0.001,
    "cell_height_deg": 0.001,
    "num_cols": 600,
    "num_rows": 500
  },

  // Training window. Timestamps are interpreted as wall-clock time in
  // `timezone`; units are half-open ([start of unit, start of next)).
  "temporal": {
    "start": "2009-01-01",
    "num_units": 365,
    "unit": "day",            // "day" or "hour"
    "timezone": "America/New_York"
  },

  // Validation window for the sensor-count sweep (same grid).
  "validation_temporal": {
    "start": "2010-01-01",
    "num_units": 365,
    "unit": "day",
    "timezone": "America/New_York"
  },

  "trips": {
    // Paths or globs (wildcards in the file name only), relative to
    // this config file.
    "train": "trips/2009-*.csv",
    "validation": "trips/2010-*.csv",
    // CSV column names; defaults match the 2009 NYC TLC schema.
    "columns": {
      "pickup_datetime": "Trip_Pickup_DateTime",
      "pickup_longitude": "Start_Lon",
      "pickup_latitude": "Start_Lat",
      "dropoff_datetime": "Trip_Dropoff_DateTime",
      "dropoff_longitude": "End_Lon",
      "dropoff_latitude": "End_Lat"
    },
    // Supported specifiers: %Y %m %d %H %M %S.
    "datetime_format": "%Y-%m-%d %H:%M:%S",
    // Added to every parsed timestamp; use when inputs are UTC but the
    // analysis zone is not.
    "utc_offset_minutes": 0
  },

  // Candidate sensor counts. The chosen count minimizes validation
  // RMSE; "deim" is the residual-based selection, "naive" the
  // per-component argmax.
  "sweep": {
    "q_min": 1,
    "q_max": 20,
    "method": "deim"
  },

  "detect": {
    "classes": 7,     // natural-breaks classes for event-index maps
    "top_days": 10    // units exported as GeoJSON, by descending RMSE
  },

  // All outputs are written under this directory (relative to the
  // config file).
  "output_dir": "deimos-out",

  // Worker threads for ingestion; 0 = all hardware threads. The
  // DEIMOS_THREADS environment variable overrides 0.
  "threads": 0
}
)";
}

} // namespace deimos
