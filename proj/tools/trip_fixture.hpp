#pragma once

// Deterministic synthetic trip-data fixture: three hotspot demand modes
// with weekly profiles shared by a training and a validation year,
// small integer noise, and planted one-day event clusters in background
// cells. Every trip puts both endpoints in the same cell, so the
// planted count matrix is known exactly (entry = 2 * generated trips).
// Used by the demo generator and the pipeline tests.
//
// The geometry is tuned so that the pieces do not interfere:
//  - hotspot modes are spatially peaked, which keeps the sensor
//    interpolation well conditioned and the basis-rotation leakage away
//    from the background cells;
//  - each event spreads over a cell cluster, which keeps its singular
//    value below the noise spectrum (events never claim a dominant
//    component or a sensor) while its one-day footprint still tops the
//    daily RMSE ranking;
//  - events sit in background cells far from the hotspots, where the
//    event index contest is against plain noise.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "deimos/activity.hpp"
#include "deimos/grid.hpp"
#include "deimos/temporal.hpp"

namespace deimos::fixture {

// splitmix64: tiny, seedable, identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::int64_t below(std::int64_t n) {
        return static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(n));
    }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// A planted event: extra trips on one unit over a block of cells.
struct EventCluster {
    std::int64_t unit;
    std::vector<std::int64_t> cells;
    std::int64_t trips_per_cell; // demand += 2 * trips_per_cell per cell
};

struct FixtureSpec {
    GridSpec grid{-74.05, 40.60, 0.005, 0.005, 20, 10}; // 200 cells
    TemporalSpec train_window{*parse_civil_date("2009-01-01"), 60, TimeUnit::day,
                              "America/New_York"};
    TemporalSpec val_window{*parse_civil_date("2010-01-01"), 60, TimeUnit::day,
                            "America/New_York"};
    std::int64_t rank = 3;
    std::uint64_t seed = 20090101;
    std::vector<EventCluster> train_events{{10, {1, 2, 3, 21, 22, 23}, 9},
                                           {25, {16, 17, 18, 36, 37, 38}, 9},
                                           {40, {181, 182, 183, 161, 162, 163}, 9},
                                           {55, {196, 197, 198, 176, 177, 178}, 9}};
    std::vector<EventCluster> val_events{{7, {5, 6, 7, 25, 26, 27}, 9},
                                         {22, {12, 13, 14, 32, 33, 34}, 9},
                                         {48, {185, 186, 187, 165, 166, 167}, 9}};
    std::int64_t malformed_rows = 5;
    std::int64_t out_of_grid_trips = 3;
};

struct FixtureData {
    FixtureSpec spec;
    CountMatrix train_counts; // expected activity matrix (demand, = 2 * trips)
    CountMatrix val_counts;
};

namespace detail {

struct Hotspot {
    double col, row, width, amplitude, phase;
};

inline const std::vector<Hotspot>& hotspots() {
    static const std::vector<Hotspot> h{{4.0, 3.0, 1.3, 60.0, 0.0},
                                        {15.0, 6.0, 1.6, 45.0, 1.1},
                                        {9.0, 8.0, 1.1, 35.0, 2.2}};
    return h;
}

inline double daily_profile(std::int64_t day, double phase) {
    const double t = static_cast<double>(day);
    const double two_pi = 6.283185307179586;
    return 3.0 + std::sin(two_pi * t / 7.0 + phase) + 0.5 * std::sin(two_pi * t / 30.0 + 2.0 * phase);
}

/// Smooth hotspot demand rounded to whole trips, plus integer noise in
/// [-2, 2].
inline CountMatrix base_trips(const GridSpec& grid, std::int64_t num_units, Rng& rng) {
    const std::int64_t x = grid.cell_count();
    CountMatrix trips(x, num_units);
    for (std::int64_t cell = 0; cell < x; ++cell) {
        const std::int64_t row = cell / grid.num_cols;
        const std::int64_t col = cell % grid.num_cols;
        std::vector<double> weights;
        for (const Hotspot& h : hotspots()) {
            const double d2 = (static_cast<double>(col) - h.col) * (static_cast<double>(col) - h.col) +
                              (static_cast<double>(row) - h.row) * (static_cast<double>(row) - h.row);
            weights.push_back(h.amplitude * std::exp(-d2 / (2.0 * h.width * h.width)));
        }
        for (std::int64_t j = 0; j < num_units; ++j) {
            double s = 0.0;
            for (std::size_t m = 0; m < weights.size(); ++m)
                s += weights[m] * daily_profile(j, hotspots()[m].phase);
            const std::int64_t noisy = static_cast<std::int64_t>(std::llround(s)) + rng.below(5) - 2;
            trips(cell, j) = std::max<std::int64_t>(0, noisy);
        }
    }
    return trips;
}

inline void write_trips_csv(const std::string& path, const CountMatrix& trips,
                            const GridSpec& grid, const TemporalSpec& temporal, Rng& rng,
                            std::int64_t malformed_rows, std::int64_t out_of_grid_trips) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("fixture: cannot write '" + path + "'");
    out << "vendor_name,Trip_Pickup_DateTime,Trip_Dropoff_DateTime,Passenger_Count,"
           "Start_Lon,Start_Lat,End_Lon,End_Lat\n";
    char buf[256];
    for (std::int64_t cell = 0; cell < trips.rows(); ++cell) {
        const LonLat c = cell_centroid(cell, grid);
        for (std::int64_t j = 0; j < trips.cols(); ++j) {
            const std::string date = format_civil_date(temporal.start_day + j);
            for (std::int64_t t = 0; t < trips(cell, j); ++t) {
                // jitter inside the cell so points are not all identical
                const double lon = c.longitude + (rng.unit() - 0.5) * 0.8 * grid.cell_width_deg;
                const double lat = c.latitude + (rng.unit() - 0.5) * 0.8 * grid.cell_height_deg;
                const int hour = static_cast<int>(rng.below(24));
                const int minute = static_cast<int>(rng.below(60));
                std::snprintf(buf, sizeof(buf),
                              "SYN,%s %02d:%02d:00,%s %02d:%02d:00,1,%.6f,%.6f,%.6f,%.6f\n",
                              date.c_str(), hour, minute, date.c_str(), hour,
                              static_cast<int>(std::min<std::int64_t>(59, minute + 5)), lon, lat,
                              lon, lat);
                out << buf;
            }
        }
    }
    const std::string d0 = format_civil_date(temporal.start_day);
    for (std::int64_t i = 0; i < malformed_rows; ++i)
        out << "SYN," << d0 << " 09:00:00," << d0 << " 09:10:00,1,,,,\n";
    for (std::int64_t i = 0; i < out_of_grid_trips; ++i)
        out << "SYN," << d0 << " 10:00:00," << d0 << " 10:10:00,1,-70.0,40.0,-70.0,40.0\n";
    if (!out) throw io_error("fixture: write failed for '" + path + "'");
}

} // namespace detail

/// Generate the fixture; the returned count matrices are the exact
/// expected activity matrices (weights of both trip endpoints included,
/// malformed and out-of-grid extras excluded).
inline FixtureData make_fixture(const FixtureSpec& spec = {}) {
    Rng rng(spec.seed);
    FixtureData data;
    data.spec = spec;
    CountMatrix train_trips = detail::base_trips(spec.grid, spec.train_window.num_units, rng);
    CountMatrix val_trips = detail::base_trips(spec.grid, spec.val_window.num_units, rng);
    for (const EventCluster& e : spec.train_events)
        for (std::int64_t c : e.cells) train_trips(c, e.unit) += e.trips_per_cell;
    for (const EventCluster& e : spec.val_events)
        for (std::int64_t c : e.cells) val_trips(c, e.unit) += e.trips_per_cell;
    data.train_counts = 2 * train_trips;
    data.val_counts = 2 * val_trips;
    return data;
}

/// Write train.csv, val.csv, and a ready-to-run config.json into a
/// directory. Returns the generated fixture data for verification.
inline FixtureData write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    FixtureData data = make_fixture(spec);
    Rng rng(spec.seed ^ 0xABCDEF);
    detail::write_trips_csv((dir / "train.csv").string(), data.train_counts / 2, spec.grid,
                            spec.train_window, rng, spec.malformed_rows, spec.out_of_grid_trips);
    detail::write_trips_csv((dir / "val.csv").string(), data.val_counts / 2, spec.grid,
                            spec.val_window, rng, spec.malformed_rows, spec.out_of_grid_trips);

    std::ofstream cfg(dir / "config.json", std::ios::trunc);
    if (!cfg) throw io_error("fixture: cannot write config.json");
    cfg << "{\n"
        << "  \"grid\": {\"min_longitude\": " << spec.grid.min_longitude
        << ", \"min_latitude\": " << spec.grid.min_latitude
        << ", \"cell_width_deg\": " << spec.grid.cell_width_deg
        << ", \"cell_height_deg\": " << spec.grid.cell_height_deg
        << ", \"num_cols\": " << spec.grid.num_cols << ", \"num_rows\": " << spec.grid.num_rows
        << "},\n"
        << "  \"temporal\": {\"start\": \"" << format_civil_date(spec.train_window.start_day)
        << "\", \"num_units\": " << spec.train_window.num_units
        << ", \"unit\": \"day\", \"timezone\": \"" << spec.train_window.timezone << "\"},\n"
        << "  \"validation_temporal\": {\"start\": \""
        << format_civil_date(spec.val_window.start_day)
        << "\", \"num_units\": " << spec.val_window.num_units
        << ", \"unit\": \"day\", \"timezone\": \"" << spec.val_window.timezone << "\"},\n"
        << "  \"trips\": {\"train\": \"train.csv\", \"validation\": \"val.csv\"},\n"
        << "  \"sweep\": {\"q_min\": 1, \"q_max\": 10, \"method\": \"deim\"},\n"
        << "  \"detect\": {\"classes\": 7, \"top_days\": 5},\n"
        << "  \"output_dir\": \"out\"\n"
        << "}\n";
    return data;
}

} // namespace deimos::fixture
