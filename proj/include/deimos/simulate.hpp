#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "deimos/activity.hpp"
#include "deimos/basis.hpp"
#include "deimos/errors.hpp"
#include "deimos/sensors.hpp"

namespace deimos {

// Reconstructions whose interpolation system is worse conditioned than
// this are refused rather than silently returned.
inline constexpr double condition_guard = 1e12;

/// The simulated uneventful field: same shape as the observation
/// matrix, real-valued (negative entries are kept; clipping would bias
/// the event index). Rows at sensor indices reproduce the observations.
struct ReconstructedMatrix {
    Eigen::MatrixXd values;
    SensorSet sensors;
    std::int64_t basis_rank = 0; // q
    double interpolation_condition = 0.0;
};

/// Spectral condition number of the q-by-q interpolation system P^T U_q.
inline double interpolation_condition(const OrthonormalBasis& basis, const SensorSet& sensors) {
    const std::int64_t q = sensors.q();
    if (q < 1 || q > basis.rank())
        throw argument_error("interpolation_condition: sensor count exceeds basis rank");
    sensors.validate(basis.components.rows());
    const Eigen::MatrixXd ptu = gather_rows(basis.components.leftCols(q), sensors.indices);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ptu);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(q - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

/// Reconstruct the full field from sensor rows alone: interpolate the
/// sensor observations in the span of the first q components by solving
/// (P^T U_q) C = P^T A and expanding U_q C. The q-by-q system is
/// factorized once; the inverse is never formed.
inline ReconstructedMatrix simulate_uneventful(const OrthonormalBasis& basis,
                                               const SensorSet& sensors,
                                               const Eigen::MatrixXd& observations) {
    const std::int64_t q = sensors.q();
    if (q < 1 || q > basis.rank())
        throw argument_error("simulate_uneventful: sensor count " + std::to_string(q) +
                             " exceeds basis rank " + std::to_string(basis.rank()));
    if (observations.rows() != basis.components.rows())
        throw argument_error("simulate_uneventful: observation matrix has " +
                             std::to_string(observations.rows()) + " rows, basis has " +
                             std::to_string(basis.components.rows()));
    sensors.validate(observations.rows());

    const double cond = interpolation_condition(basis, sensors);
    if (!(cond <= condition_guard))
        throw numeric_error("simulate_uneventful: interpolation system ill-conditioned (cond = " +
                            std::to_string(cond) + ") for sensors " + sensors.describe());

    const auto u = basis.components.leftCols(q);
    const Eigen::MatrixXd ptu = gather_rows(u, sensors.indices);
    const Eigen::MatrixXd pta = gather_rows(observations, sensors.indices);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(ptu);

    ReconstructedMatrix recon;
    recon.values = u * lu.solve(pta);
    recon.sensors = sensors;
    recon.basis_rank = q;
    recon.interpolation_condition = cond;
    return recon;
}

inline ReconstructedMatrix simulate_uneventful(const OrthonormalBasis& basis,
                                               const SensorSet& sensors,
                                               const ActivityMatrix& observations) {
    return simulate_uneventful(basis, sensors, observations.as_real());
}

} // namespace deimos
