#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "deimos/basis.hpp"
#include "deimos/errors.hpp"
#include "deimos/grid.hpp"

namespace deimos {

enum class SelectionMethod { deim, naive };

inline std::string_view to_string(SelectionMethod m) {
    return m == SelectionMethod::deim ? "deim" : "naive";
}

inline std::optional<SelectionMethod> parse_selection_method(std::string_view s) {
    if (s == "deim") return SelectionMethod::deim;
    if (s == "naive") return SelectionMethod::naive;
    return std::nullopt;
}

/// Ordered set of q distinct sensor rows. The order is the selection
/// order: the length-p prefix is exactly the set a p-sensor selection
/// would produce. The selection operator P is never materialized; all
/// uses gather rows by these indices.
struct SensorSet {
    std::vector<std::int64_t> indices;
    SelectionMethod method = SelectionMethod::deim;

    std::int64_t q() const { return static_cast<std::int64_t>(indices.size()); }

    SensorSet prefix(std::int64_t p) const {
        if (p < 1 || p > q())
            throw argument_error("sensor prefix length out of range");
        return {std::vector<std::int64_t>(indices.begin(), indices.begin() + p), method};
    }

    std::string describe() const {
        std::ostringstream out;
        out << "[";
        for (std::size_t i = 0; i < indices.size(); ++i)
            out << (i ? "," : "") << indices[i];
        out << "]";
        return out.str();
    }

    void validate(std::int64_t row_count) const {
        if (indices.empty()) throw argument_error("sensor set is empty");
        std::vector<std::int64_t> sorted = indices;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i] < 0 || sorted[i] >= row_count)
                throw argument_error("sensor index out of range: " + std::to_string(sorted[i]));
            if (i > 0 && sorted[i] == sorted[i - 1])
                throw argument_error("sensor index repeated: " + std::to_string(sorted[i]));
        }
    }
};

/// Rows of m at the given indices, in order (the action of P^T).
inline Eigen::MatrixXd gather_rows(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                   const std::vector<std::int64_t>& indices) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), m.cols());
    for (std::size_t i = 0; i < indices.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = m.row(indices[i]);
    return out;
}

namespace detail {

// argmax of |v| over rows not yet selected; ties to the lowest index.
inline Eigen::Index argmax_abs_unused(const Eigen::VectorXd& v, const std::vector<bool>& used) {
    Eigen::Index best = -1;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        const double a = std::abs(v(i));
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    return best;
}

} // namespace detail

/// Greedy residual-based sensor selection. The first sensor is the
/// largest-magnitude entry of the first component; each later sensor is
/// the largest-magnitude entry of the residual of the next component
/// after interpolating it at the rows already chosen. This keeps the
/// interpolation system P^T U square and nonsingular.
inline SensorSet select_sensors_deim(const OrthonormalBasis& basis, std::int64_t q) {
    if (q < 1 || q > basis.rank())
        throw argument_error("select_sensors_deim: q must be in [1, " +
                             std::to_string(basis.rank()) + "], got " + std::to_string(q));
    const Eigen::MatrixXd& u = basis.components;
    std::vector<std::int64_t> indices;
    indices.reserve(static_cast<std::size_t>(q));
    std::vector<bool> used(static_cast<std::size_t>(u.rows()), false);

    indices.push_back(detail::argmax_abs(u.col(0)));
    used[static_cast<std::size_t>(indices[0])] = true;

    for (std::int64_t l = 1; l < q; ++l) {
        const Eigen::MatrixXd sub = gather_rows(u.leftCols(l), indices);
        const Eigen::VectorXd rhs = gather_rows(u.col(l), indices);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
        if (!lu.isInvertible())
            throw numeric_error("select_sensors_deim: interpolation system singular at step " +
                                std::to_string(l + 1));
        const Eigen::VectorXd coeff = lu.solve(rhs);
        const Eigen::VectorXd residual = u.col(l) - u.leftCols(l) * coeff;
        // The residual vanishes at selected rows in exact arithmetic;
        // masking them guarantees distinct indices under roundoff.
        const Eigen::Index pick = detail::argmax_abs_unused(residual, used);
        indices.push_back(pick);
        used[static_cast<std::size_t>(pick)] = true;
    }
    return {std::move(indices), SelectionMethod::deim};
}

/// Per-column argmax selection: sensor l is the largest-magnitude entry
/// of component l, independently per column. When a row is already
/// taken, the next-largest unused row is used instead.
inline SensorSet select_sensors_naive(const OrthonormalBasis& basis, std::int64_t q) {
    if (q < 1 || q > basis.rank())
        throw argument_error("select_sensors_naive: q must be in [1, " +
                             std::to_string(basis.rank()) + "], got " + std::to_string(q));
    const Eigen::MatrixXd& u = basis.components;
    std::vector<std::int64_t> indices;
    indices.reserve(static_cast<std::size_t>(q));
    std::vector<bool> used(static_cast<std::size_t>(u.rows()), false);
    for (std::int64_t l = 0; l < q; ++l) {
        const Eigen::Index pick = detail::argmax_abs_unused(u.col(l), used);
        indices.push_back(pick);
        used[static_cast<std::size_t>(pick)] = true;
    }
    return {std::move(indices), SelectionMethod::naive};
}

inline SensorSet select_sensors(const OrthonormalBasis& basis, std::int64_t q,
                                SelectionMethod method) {
    return method == SelectionMethod::deim ? select_sensors_deim(basis, q)
                                           : select_sensors_naive(basis, q);
}

/// Sensor cells with their centroid coordinates, in selection order.
struct SensorLocation {
    std::int64_t order = 0; // 1-based selection rank
    cell_index cell = 0;
    LonLat centroid;
};

inline std::vector<SensorLocation> sensor_geolocation(const SensorSet& sensors,
                                                      const GridSpec& grid) {
    grid.validate();
    sensors.validate(grid.cell_count());
    std::vector<SensorLocation> out;
    out.reserve(sensors.indices.size());
    for (std::size_t i = 0; i < sensors.indices.size(); ++i)
        out.push_back({static_cast<std::int64_t>(i + 1), sensors.indices[i],
                       cell_centroid(sensors.indices[i], grid)});
    return out;
}

inline void save_sensors(const SensorSet& sensors, const std::string& path) {
    nlohmann::json j{{"format", "deimos-sensors"},
                     {"format_version", container_format_version},
                     {"method", std::string(to_string(sensors.method))},
                     {"q", sensors.q()},
                     {"indices", sensors.indices}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("sensors: cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

inline SensorSet load_sensors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("sensors: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
        if (j.at("format") != "deimos-sensors")
            throw format_error("sensors: '" + path + "' is not a sensor file");
        if (j.at("format_version").get<int>() != container_format_version)
            throw format_error("sensors: unsupported format version in '" + path + "'");
        SensorSet s;
        const auto method = parse_selection_method(j.at("method").get<std::string>());
        if (!method) throw format_error("sensors: unknown method in '" + path + "'");
        s.method = *method;
        s.indices = j.at("indices").get<std::vector<std::int64_t>>();
        if (s.q() != j.at("q").get<std::int64_t>())
            throw format_error("sensors: declared q disagrees with index list in '" + path + "'");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw format_error("sensors: '" + path + "' is malformed: " + e.what());
    }
}

} // namespace deimos
