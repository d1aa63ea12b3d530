#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "deimos/activity.hpp"
#include "deimos/errors.hpp"
#include "deimos/simulate.hpp"

namespace deimos {

namespace detail {

inline void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                               const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw argument_error(std::string(op) + ": dimension mismatch (" +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                             std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
}

} // namespace detail

/// Per-unit root-mean-square difference over all cells:
/// rmse_j = sqrt(sum_i (a_ij - r_ij)^2 / x).
inline Eigen::VectorXd column_rmse(const Eigen::MatrixXd& observed,
                                   const Eigen::MatrixXd& simulated) {
    detail::require_same_shape(observed, simulated, "column_rmse");
    const double x = static_cast<double>(observed.rows());
    return ((observed - simulated).colwise().squaredNorm() / x).cwiseSqrt().transpose();
}

/// Whole-dataset RMSE with per-entry normalization, so datasets with
/// different unit counts are comparable:
/// sqrt(sum_ij (a_ij - r_ij)^2 / (x * k)).
inline double overall_rmse(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& simulated) {
    detail::require_same_shape(observed, simulated, "overall_rmse");
    const double nk = static_cast<double>(observed.rows()) * static_cast<double>(observed.cols());
    return std::sqrt((observed - simulated).squaredNorm() / nk);
}

/// Entry-wise observation minus simulation. Positive values mark more
/// demand than the uneventful baseline, negative less.
inline Eigen::MatrixXd event_index(const Eigen::MatrixXd& observed,
                                   const Eigen::MatrixXd& simulated) {
    detail::require_same_shape(observed, simulated, "event_index");
    return observed - simulated;
}

inline Eigen::VectorXd column_rmse(const ActivityMatrix& observed,
                                   const ReconstructedMatrix& simulated) {
    return column_rmse(observed.as_real(), simulated.values);
}

inline double overall_rmse(const ActivityMatrix& observed, const ReconstructedMatrix& simulated) {
    return overall_rmse(observed.as_real(), simulated.values);
}

inline Eigen::MatrixXd event_index(const ActivityMatrix& observed,
                                   const ReconstructedMatrix& simulated) {
    return event_index(observed.as_real(), simulated.values);
}

struct RankedUnit {
    std::int64_t unit = 0;
    double rmse = 0.0;
};

/// Units sorted by RMSE descending; ties go to the earlier unit.
inline std::vector<RankedUnit> rank_event_days(const Eigen::VectorXd& series, std::int64_t top_n) {
    if (top_n < 0 || top_n > series.size())
        throw argument_error("rank_event_days: top_n must be in [0, " +
                             std::to_string(series.size()) + "], got " + std::to_string(top_n));
    std::vector<std::int64_t> order(static_cast<std::size_t>(series.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
        if (series(a) != series(b)) return series(a) > series(b);
        return a < b;
    });
    std::vector<RankedUnit> out;
    out.reserve(static_cast<std::size_t>(top_n));
    for (std::int64_t i = 0; i < top_n; ++i) out.push_back({order[static_cast<std::size_t>(i)],
                                                            series(order[static_cast<std::size_t>(i)])});
    return out;
}

} // namespace deimos
