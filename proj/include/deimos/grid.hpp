#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "deimos/errors.hpp"

namespace deimos {

using cell_index = std::int64_t;

struct LonLat {
    double longitude = 0.0;
    double latitude = 0.0;
};

/// Regular longitude/latitude grid. Cell (row, col) covers the half-open
/// box [min + col*w, min + (col+1)*w) x [min + row*h, min + (row+1)*h),
/// so every in-bounds point falls in exactly one cell and points on the
/// outer max edges are out of bounds. Cell ids are row-major:
/// id = row * num_cols + col.
struct GridSpec {
    double min_longitude = 0.0;
    double min_latitude = 0.0;
    double cell_width_deg = 0.0;
    double cell_height_deg = 0.0;
    std::int64_t num_cols = 0; // m
    std::int64_t num_rows = 0; // n

    std::int64_t cell_count() const { return num_rows * num_cols; }

    void validate() const {
        if (!(cell_width_deg > 0.0) || !(cell_height_deg > 0.0))
            throw argument_error("grid: cell_width_deg and cell_height_deg must be positive");
        if (num_cols < 1 || num_rows < 1)
            throw argument_error("grid: num_cols and num_rows must be at least 1");
    }

    bool operator==(const GridSpec&) const = default;
};

/// Map a point to its cell id, or nullopt when it lies outside the grid.
inline std::optional<cell_index> locate_cell(double longitude, double latitude, const GridSpec& g) {
    const double col = std::floor((longitude - g.min_longitude) / g.cell_width_deg);
    const double row = std::floor((latitude - g.min_latitude) / g.cell_height_deg);
    if (!(col >= 0.0) || !(row >= 0.0) ||
        col >= static_cast<double>(g.num_cols) || row >= static_cast<double>(g.num_rows))
        return std::nullopt;
    return static_cast<cell_index>(row) * g.num_cols + static_cast<cell_index>(col);
}

inline LonLat cell_centroid(cell_index id, const GridSpec& g) {
    if (id < 0 || id >= g.cell_count())
        throw argument_error("cell_centroid: cell id " + std::to_string(id) + " out of range");
    const std::int64_t row = id / g.num_cols;
    const std::int64_t col = id % g.num_cols;
    return {g.min_longitude + (static_cast<double>(col) + 0.5) * g.cell_width_deg,
            g.min_latitude + (static_cast<double>(row) + 0.5) * g.cell_height_deg};
}

/// Closed ring of the cell boundary (5 vertices, counter-clockwise,
/// first == last) for polygon export.
inline std::array<LonLat, 5> cell_polygon(cell_index id, const GridSpec& g) {
    if (id < 0 || id >= g.cell_count())
        throw argument_error("cell_polygon: cell id " + std::to_string(id) + " out of range");
    const std::int64_t row = id / g.num_cols;
    const std::int64_t col = id % g.num_cols;
    const double lon0 = g.min_longitude + static_cast<double>(col) * g.cell_width_deg;
    const double lat0 = g.min_latitude + static_cast<double>(row) * g.cell_height_deg;
    const double lon1 = lon0 + g.cell_width_deg;
    const double lat1 = lat0 + g.cell_height_deg;
    return {{{lon0, lat0}, {lon1, lat0}, {lon1, lat1}, {lon0, lat1}, {lon0, lat0}}};
}

} // namespace deimos
