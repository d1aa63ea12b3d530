#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "deimos/errors.hpp"
#include "deimos/grid.hpp"
#include "deimos/sensors.hpp"

namespace deimos {

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw io_error("write failed for '" + path + "'");
}

/// Sensor locations as a GeoJSON FeatureCollection of points.
inline nlohmann::json sensors_to_geojson(const SensorSet& sensors, const GridSpec& grid) {
    nlohmann::json features = nlohmann::json::array();
    for (const SensorLocation& loc : sensor_geolocation(sensors, grid)) {
        features.push_back({{"type", "Feature"},
                            {"geometry",
                             {{"type", "Point"},
                              {"coordinates", {loc.centroid.longitude, loc.centroid.latitude}}}},
                            {"properties", {{"order", loc.order}, {"cell_id", loc.cell}}}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

inline std::string sensors_to_csv(const SensorSet& sensors, const GridSpec& grid) {
    std::ostringstream out;
    out.precision(12);
    out << "order,cell_id,longitude,latitude\n";
    for (const SensorLocation& loc : sensor_geolocation(sensors, grid))
        out << loc.order << "," << loc.cell << "," << loc.centroid.longitude << ","
            << loc.centroid.latitude << "\n";
    return out.str();
}

/// One temporal unit of the event-index field as a GeoJSON
/// FeatureCollection of cell polygons with the per-cell index value and
/// its class under the shared break list.
inline nlohmann::json event_day_to_geojson(const Eigen::Ref<const Eigen::VectorXd>& event_column,
                                           std::span<const int> cell_classes, const GridSpec& grid,
                                           const std::string& unit_label) {
    if (event_column.size() != grid.cell_count() ||
        static_cast<std::int64_t>(cell_classes.size()) != grid.cell_count())
        throw argument_error("event geojson: column size disagrees with grid cell count");
    nlohmann::json features = nlohmann::json::array();
    for (cell_index c = 0; c < grid.cell_count(); ++c) {
        const auto ring = cell_polygon(c, grid);
        nlohmann::json coords = nlohmann::json::array();
        for (const LonLat& v : ring) coords.push_back({v.longitude, v.latitude});
        features.push_back({{"type", "Feature"},
                            {"geometry",
                             {{"type", "Polygon"},
                              {"coordinates", nlohmann::json::array({coords})}}},
                            {"properties",
                             {{"cell_id", c},
                              {"event_index", event_column(c)},
                              {"jenks_class", cell_classes[static_cast<std::size_t>(c)]}}}});
    }
    return {{"type", "FeatureCollection"},
            {"features", features},
            {"properties", {{"unit", unit_label}}}};
}

} // namespace deimos
