#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "deimos/activity.hpp"
#include "deimos/basis.hpp"
#include "deimos/detect.hpp"
#include "deimos/errors.hpp"
#include "deimos/sensors.hpp"
#include "deimos/simulate.hpp"

namespace deimos {

struct SweepPoint {
    std::int64_t q = 0;
    double train_rmse = 0.0;
    double validation_rmse = 0.0;
    double condition = 0.0;
    bool valid = true; // false when the interpolation guard fired
};

struct SweepCurve {
    std::vector<SweepPoint> points; // ascending q
    std::int64_t q_min = 0;
    std::int64_t q_max = 0;       // effective upper bound after any rank clamp
    std::int64_t rank_limit = 0;  // retained rank of the training basis
    bool clamped = false;         // q_max was reduced to rank_limit
    SelectionMethod method = SelectionMethod::deim;
};

struct OptimalCount {
    std::int64_t q = 0;
    double validation_rmse = 0.0;
    /// The minimum sits at an end of the swept range, so the curve may
    /// never have turned up; widen the range.
    bool boundary = false;
};

/// Evaluate candidate sensor counts against a basis already computed
/// from the training matrix. Validation reuses the training components
/// and sensor rows against the validation observations, so no
/// validation information leaks into the selection. The one basis is
/// truncated per q (singular vectors nest), and sensor prefixes are
/// reused the same way.
inline SweepCurve sweep_sensor_counts(const OrthonormalBasis& basis, const Eigen::MatrixXd& train,
                                      const Eigen::MatrixXd& val, std::int64_t q_min,
                                      std::int64_t q_max, SelectionMethod method) {
    if (train.rows() != val.rows())
        throw argument_error("sweep: training and validation matrices have different cell counts (" +
                             std::to_string(train.rows()) + " vs " + std::to_string(val.rows()) + ")");
    if (basis.components.rows() != train.rows())
        throw argument_error("sweep: basis does not match the training matrix rows");
    if (q_min < 1 || q_min > q_max)
        throw argument_error("sweep: require 1 <= q_min <= q_max");

    SweepCurve curve;
    curve.q_min = q_min;
    curve.rank_limit = basis.rank();
    curve.method = method;
    curve.clamped = q_max > basis.rank();
    curve.q_max = curve.clamped ? basis.rank() : q_max;
    if (q_min > curve.q_max)
        throw argument_error("sweep: q_min " + std::to_string(q_min) +
                             " exceeds the training matrix rank " + std::to_string(basis.rank()));

    const SensorSet full = select_sensors(basis, curve.q_max, method);
    for (std::int64_t q = q_min; q <= curve.q_max; ++q) {
        const SensorSet sensors = full.prefix(q);
        SweepPoint point;
        point.q = q;
        point.condition = interpolation_condition(basis, sensors);
        if (!(point.condition <= condition_guard)) {
            point.valid = false;
            point.train_rmse = std::numeric_limits<double>::quiet_NaN();
            point.validation_rmse = std::numeric_limits<double>::quiet_NaN();
        } else {
            point.train_rmse = overall_rmse(train, simulate_uneventful(basis, sensors, train).values);
            point.validation_rmse = overall_rmse(val, simulate_uneventful(basis, sensors, val).values);
        }
        curve.points.push_back(point);
    }
    return curve;
}

/// Convenience overload: decompose the training matrix, then sweep.
inline SweepCurve sweep_sensor_counts(const Eigen::MatrixXd& train, const Eigen::MatrixXd& val,
                                      std::int64_t q_min, std::int64_t q_max,
                                      SelectionMethod method) {
    if (q_min < 1 || q_min > q_max)
        throw argument_error("sweep: require 1 <= q_min <= q_max");
    const std::int64_t hard_max = std::min<std::int64_t>(train.rows(), train.cols());
    const OrthonormalBasis basis = compute_basis(train, std::min(q_max, hard_max));
    return sweep_sensor_counts(basis, train, val, q_min, q_max, method);
}

inline SweepCurve sweep_sensor_counts(const ActivityMatrix& train, const ActivityMatrix& val,
                                      std::int64_t q_min, std::int64_t q_max,
                                      SelectionMethod method) {
    if (train.grid != val.grid)
        throw argument_error("sweep: training and validation matrices use different grids");
    return sweep_sensor_counts(train.as_real(), val.as_real(), q_min, q_max, method);
}

/// The sensor count with minimum validation RMSE among valid points;
/// ties go to the smaller count.
inline OptimalCount optimal_sensor_count(const SweepCurve& curve) {
    const SweepPoint* best = nullptr;
    const SweepPoint* first_valid = nullptr;
    const SweepPoint* last_valid = nullptr;
    for (const SweepPoint& p : curve.points) {
        if (!p.valid) continue;
        if (!first_valid) first_valid = &p;
        last_valid = &p;
        if (!best || p.validation_rmse < best->validation_rmse) best = &p;
    }
    if (!best) throw argument_error("optimal_sensor_count: sweep curve has no valid points");
    OptimalCount out;
    out.q = best->q;
    out.validation_rmse = best->validation_rmse;
    out.boundary = (best == last_valid) || (best == first_valid && curve.q_min > 1);
    return out;
}

} // namespace deimos
