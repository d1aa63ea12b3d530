#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "deimos/activity.hpp"
#include "deimos/detect.hpp"
#include "deimos/jenks.hpp"
#include "deimos/simulate.hpp"

namespace deimos {

/// Everything the comparison stage produces: the per-unit RMSE series,
/// the event-index field, the ranked units, and the class breaks shared
/// by all units (computed once on the pooled event-index values so the
/// same class means the same range on every map).
struct EventReport {
    Eigen::VectorXd daily_rmse;        // length k
    double overall_rmse = 0.0;
    Eigen::MatrixXd event_index;       // x by k
    std::vector<RankedUnit> ranked_days; // all k units, descending
    std::vector<double> jenks_breaks;  // classes+1 ascending values
    std::int64_t classes = 0;
    double jenks_within_class_ssd = 0.0;
};

inline EventReport build_event_report(const Eigen::MatrixXd& observed,
                                      const Eigen::MatrixXd& simulated, std::int64_t classes) {
    EventReport report;
    report.daily_rmse = column_rmse(observed, simulated);
    report.overall_rmse = overall_rmse(observed, simulated);
    report.event_index = event_index(observed, simulated);
    report.ranked_days = rank_event_days(report.daily_rmse, report.daily_rmse.size());

    std::vector<double> pooled(report.event_index.data(),
                               report.event_index.data() + report.event_index.size());
    const JenksResult jenks = jenks_natural_breaks(std::move(pooled), classes);
    report.jenks_breaks = jenks.breaks;
    report.classes = classes;
    report.jenks_within_class_ssd = jenks.within_class_ssd;
    return report;
}

inline EventReport build_event_report(const ActivityMatrix& observed,
                                      const ReconstructedMatrix& simulated,
                                      std::int64_t classes) {
    return build_event_report(observed.as_real(), simulated.values, classes);
}

} // namespace deimos
