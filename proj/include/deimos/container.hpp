#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "deimos/activity.hpp"
#include "deimos/errors.hpp"
#include "deimos/grid.hpp"
#include "deimos/temporal.hpp"
#include "deimos/version.hpp"

// Persistence container: a raw little-endian row-major payload at the
// given path plus a JSON sidecar at <path>.meta.json carrying dtype,
// dimensions, a CRC-32 of the payload, and domain metadata. Loading
// verifies format version, declared size, and checksum.

namespace deimos {

namespace detail {

inline std::uint32_t crc32(const void* data, std::size_t size, std::uint32_t seed = 0) {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int j = 0; j < 8; ++j) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = ~seed;
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) crc = table[(crc ^ p[i]) & 0xFFu] ^ (crc >> 8);
    return ~crc;
}

inline std::string sidecar_path(const std::string& path) { return path + ".meta.json"; }

template <typename Scalar>
constexpr const char* dtype_name() {
    if constexpr (std::is_same_v<Scalar, std::int64_t>) return "i64";
    else return "f64";
}

template <typename Derived>
std::uint32_t write_payload(const std::string& path, const Eigen::MatrixBase<Derived>& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("container: cannot write '" + path + "'");
    using Scalar = typename Derived::Scalar;
    std::vector<Scalar> row(static_cast<std::size_t>(m.cols()));
    std::uint32_t crc = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
        const std::size_t bytes = row.size() * sizeof(Scalar);
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(bytes));
        crc = crc32(row.data(), bytes, crc);
    }
    if (!out) throw io_error("container: write failed for '" + path + "'");
    return crc;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>
read_payload(const std::string& path, std::int64_t rows, std::int64_t cols,
             std::uint32_t expected_crc) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("container: cannot open '" + path + "'");
    in.seekg(0, std::ios::end);
    const std::int64_t file_size = static_cast<std::int64_t>(in.tellg());
    in.seekg(0);
    const std::int64_t expected_size = rows * cols * static_cast<std::int64_t>(sizeof(Scalar));
    if (file_size != expected_size)
        throw format_error("container: '" + path + "' has " + std::to_string(file_size) +
                           " bytes, expected " + std::to_string(expected_size));
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);
    std::vector<Scalar> row(static_cast<std::size_t>(cols));
    std::uint32_t crc = 0;
    for (std::int64_t i = 0; i < rows; ++i) {
        const std::size_t bytes = row.size() * sizeof(Scalar);
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(bytes));
        if (!in) throw format_error("container: '" + path + "' truncated");
        crc = crc32(row.data(), bytes, crc);
        for (std::int64_t j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    if (crc != expected_crc)
        throw format_error("container: checksum mismatch for '" + path + "'");
    return m;
}

inline nlohmann::json grid_to_json(const GridSpec& g) {
    return {{"min_longitude", g.min_longitude}, {"min_latitude", g.min_latitude},
            {"cell_width_deg", g.cell_width_deg}, {"cell_height_deg", g.cell_height_deg},
            {"num_cols", g.num_cols}, {"num_rows", g.num_rows}};
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
    GridSpec g;
    g.min_longitude = j.at("min_longitude").get<double>();
    g.min_latitude = j.at("min_latitude").get<double>();
    g.cell_width_deg = j.at("cell_width_deg").get<double>();
    g.cell_height_deg = j.at("cell_height_deg").get<double>();
    g.num_cols = j.at("num_cols").get<std::int64_t>();
    g.num_rows = j.at("num_rows").get<std::int64_t>();
    return g;
}

inline nlohmann::json temporal_to_json(const TemporalSpec& t) {
    return {{"start", format_civil_date(t.start_day)}, {"num_units", t.num_units},
            {"unit", std::string(to_string(t.unit))}, {"timezone", t.timezone}};
}

inline TemporalSpec temporal_from_json(const nlohmann::json& j) {
    TemporalSpec t;
    const auto day = parse_civil_date(j.at("start").get<std::string>());
    if (!day) throw format_error("container: bad start date in temporal metadata");
    t.start_day = *day;
    t.num_units = j.at("num_units").get<std::int64_t>();
    const auto unit = parse_time_unit(j.at("unit").get<std::string>());
    if (!unit) throw format_error("container: bad unit in temporal metadata");
    t.unit = *unit;
    t.timezone = j.at("timezone").get<std::string>();
    return t;
}

inline nlohmann::json load_sidecar(const std::string& path, const char* expected_kind) {
    const std::string meta_path = sidecar_path(path);
    std::ifstream in(meta_path);
    if (!in) throw io_error("container: cannot open sidecar '" + meta_path + "'");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw format_error("container: sidecar '" + meta_path + "' is not valid JSON: " + e.what());
    }
    try {
        if (meta.at("format") != "deimos-container")
            throw format_error("container: '" + meta_path + "' is not a deimos container");
        if (meta.at("format_version").get<int>() != container_format_version)
            throw format_error("container: unsupported format version in '" + meta_path + "'");
        if (meta.at("kind") != expected_kind)
            throw format_error("container: '" + path + "' holds kind '" +
                               meta.at("kind").get<std::string>() + "', expected '" +
                               expected_kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw format_error("container: sidecar '" + meta_path + "' is incomplete: " + e.what());
    }
    return meta;
}

inline void write_sidecar(const std::string& path, nlohmann::json meta) {
    const std::string meta_path = sidecar_path(path);
    std::ofstream out(meta_path, std::ios::trunc);
    if (!out) throw io_error("container: cannot write sidecar '" + meta_path + "'");
    out << meta.dump(2) << "\n";
    if (!out) throw io_error("container: write failed for '" + meta_path + "'");
}

template <typename Json>
nlohmann::json base_meta(const char* kind, const char* dtype, std::int64_t rows,
                         std::int64_t cols, std::uint32_t crc, Json&& extra) {
    nlohmann::json meta = std::forward<Json>(extra);
    meta["format"] = "deimos-container";
    meta["format_version"] = container_format_version;
    meta["tool_version"] = version_string;
    meta["kind"] = kind;
    meta["dtype"] = dtype;
    meta["byte_order"] = "little";
    meta["order"] = "row-major";
    meta["rows"] = rows;
    meta["cols"] = cols;
    meta["payload_crc32"] = crc;
    return meta;
}

} // namespace detail

inline void save_activity_matrix(const ActivityMatrix& m, const std::string& path) {
    m.validate();
    const std::uint32_t crc = detail::write_payload(path, m.values);
    nlohmann::json extra{{"grid", detail::grid_to_json(m.grid)},
                         {"temporal", detail::temporal_to_json(m.temporal)},
                         {"dropped_count", m.dropped_count}};
    detail::write_sidecar(path, detail::base_meta("activity", "i64", m.values.rows(),
                                                  m.values.cols(), crc, std::move(extra)));
}

inline ActivityMatrix load_activity_matrix(const std::string& path) {
    const nlohmann::json meta = detail::load_sidecar(path, "activity");
    ActivityMatrix m;
    try {
        m.grid = detail::grid_from_json(meta.at("grid"));
        m.temporal = detail::temporal_from_json(meta.at("temporal"));
        m.dropped_count = meta.at("dropped_count").get<std::int64_t>();
        const auto rows = meta.at("rows").get<std::int64_t>();
        const auto cols = meta.at("cols").get<std::int64_t>();
        if (rows != m.grid.cell_count() || cols != m.temporal.num_units)
            throw format_error("container: declared dimensions disagree with grid/temporal specs");
        m.values = detail::read_payload<std::int64_t>(path, rows, cols,
                                                      meta.at("payload_crc32").get<std::uint32_t>());
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("container: sidecar is incomplete: ") + e.what());
    }
    m.validate();
    return m;
}

/// Save a real-valued matrix with optional extra metadata (used for
/// reconstructions; extra fields are preserved on load).
inline void save_dense_matrix(const Eigen::MatrixXd& m, const std::string& path,
                              nlohmann::json extra = nlohmann::json::object()) {
    const std::uint32_t crc = detail::write_payload(path, m);
    detail::write_sidecar(path, detail::base_meta("dense", "f64", m.rows(), m.cols(), crc,
                                                  std::move(extra)));
}

inline Eigen::MatrixXd load_dense_matrix(const std::string& path,
                                         nlohmann::json* meta_out = nullptr) {
    const nlohmann::json meta = detail::load_sidecar(path, "dense");
    Eigen::MatrixXd m;
    try {
        m = detail::read_payload<double>(path, meta.at("rows").get<std::int64_t>(),
                                         meta.at("cols").get<std::int64_t>(),
                                         meta.at("payload_crc32").get<std::uint32_t>());
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("container: sidecar is incomplete: ") + e.what());
    }
    if (meta_out) *meta_out = meta;
    return m;
}

} // namespace deimos
