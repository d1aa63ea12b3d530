#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deimos/activity.hpp"
#include "deimos/basis.hpp"
#include "deimos/config.hpp"
#include "deimos/container.hpp"
#include "deimos/detect.hpp"
#include "deimos/geojson.hpp"
#include "deimos/report.hpp"
#include "deimos/sensors.hpp"
#include "deimos/simulate.hpp"
#include "deimos/sweep.hpp"
#include "deimos/version.hpp"

namespace deimos {

/// A stage failure, carrying the name of the stage that raised it.
class pipeline_error : public error {
public:
    pipeline_error(const std::string& stage, const std::string& what)
        : error("stage " + stage + ": " + what), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class StageClock {
public:
    void start(const std::string& name) {
        name_ = name;
        begin_ = std::chrono::steady_clock::now();
    }
    void finish(nlohmann::json& timings) {
        const auto end = std::chrono::steady_clock::now();
        timings.push_back({{"stage", name_},
                           {"seconds", std::chrono::duration<double>(end - begin_).count()}});
    }

private:
    std::string name_;
    std::chrono::steady_clock::time_point begin_;
};

inline nlohmann::json stats_to_json(const ParseStats& stats, std::int64_t dropped,
                                    std::int64_t total) {
    return {{"rows_read", stats.rows_read},
            {"rows_rejected", stats.rows_rejected},
            {"points", stats.points},
            {"dropped_weight", dropped},
            {"matrix_total", total}};
}

} // namespace detail

/// Resolve the worker-thread cap: explicit value, else DEIMOS_THREADS,
/// else all hardware threads.
inline unsigned resolve_threads(unsigned configured) {
    if (configured > 0) return configured;
    if (const char* env = std::getenv("DEIMOS_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Write the comparison-stage artifacts for a report: the RMSE series,
/// the ranked units, the shared breaks, and per-unit GeoJSON maps for
/// the top-ranked units.
inline nlohmann::json write_detect_outputs(const EventReport& report, const GridSpec& grid,
                                           const TemporalSpec& temporal,
                                           const std::filesystem::path& out_dir,
                                           std::int64_t top_days) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    {
        std::ostringstream csv;
        csv.precision(12);
        csv << "unit,date,rmse\n";
        for (Eigen::Index j = 0; j < report.daily_rmse.size(); ++j)
            csv << j << "," << temporal.unit_label(j) << "," << report.daily_rmse(j) << "\n";
        write_text_file((out_dir / "daily_rmse.csv").string(), csv.str());
    }
    {
        std::ostringstream csv;
        csv.precision(12);
        csv << "rank,unit,date,rmse\n";
        for (std::size_t r = 0; r < report.ranked_days.size(); ++r)
            csv << r + 1 << "," << report.ranked_days[r].unit << ","
                << temporal.unit_label(report.ranked_days[r].unit) << ","
                << report.ranked_days[r].rmse << "\n";
        write_text_file((out_dir / "ranked_days.csv").string(), csv.str());
    }

    std::uint64_t clamped = 0;
    const std::vector<int> classes =
        classify(std::span<const double>(report.event_index.data(),
                                         static_cast<std::size_t>(report.event_index.size())),
                 report.jenks_breaks, &clamped);

    nlohmann::json breaks{{"classes", report.classes},
                          {"breaks", report.jenks_breaks},
                          {"within_class_ssd", report.jenks_within_class_ssd},
                          {"clamped_values", clamped},
                          {"pooled_over", "all units"}};
    write_text_file((out_dir / "breaks.json").string(), breaks.dump(2) + "\n");

    const std::int64_t n_maps =
        std::min<std::int64_t>(top_days, static_cast<std::int64_t>(report.ranked_days.size()));
    nlohmann::json map_files = nlohmann::json::array();
    const std::int64_t x = grid.cell_count();
    std::vector<int> day_classes(static_cast<std::size_t>(x));
    for (std::int64_t r = 0; r < n_maps; ++r) {
        const std::int64_t j = report.ranked_days[static_cast<std::size_t>(r)].unit;
        for (std::int64_t i = 0; i < x; ++i)
            day_classes[static_cast<std::size_t>(i)] =
                classes[static_cast<std::size_t>(j * x + i)];
        const std::string label = temporal.unit_label(j);
        const std::string name = "event_index_" + label + ".geojson";
        const nlohmann::json geo =
            event_day_to_geojson(report.event_index.col(j), day_classes, grid, label);
        write_text_file((out_dir / name).string(), geo.dump() + "\n");
        map_files.push_back(name);
    }

    return {{"overall_rmse", report.overall_rmse},
            {"classes", report.classes},
            {"breaks", report.jenks_breaks},
            {"clamped_values", clamped},
            {"maps", map_files}};
}

/// Execute the full workflow: build the training and validation
/// matrices, sweep sensor counts, select sensors at the optimum,
/// simulate the uneventful scenario for the training window, and
/// compare. All artifacts land under config.output_dir together with a
/// run manifest. A `.partial` marker exists in the output directory
/// while the run is incomplete.
inline nlohmann::json run_pipeline(const RunConfig& config,
                                   const std::filesystem::path& base_dir = ".",
                                   const nlohmann::json* raw_config = nullptr) {
    namespace fs = std::filesystem;
    const unsigned threads = resolve_threads(config.threads);

    // Fail fast: resolve every input before any compute.
    std::vector<std::string> train_files, val_files;
    try {
        train_files = expand_glob(config.train_trips, base_dir);
        if (config.validation_trips.empty())
            throw config_error("run requires trips.validation for the sensor-count sweep");
        if (!config.validation_temporal)
            throw config_error("run requires a validation_temporal window");
        val_files = expand_glob(config.validation_trips, base_dir);
    } catch (const error& e) {
        throw pipeline_error("validate-config", e.what());
    }

    fs::path out_dir(config.output_dir);
    if (out_dir.is_relative()) out_dir = base_dir / out_dir;
    fs::create_directories(out_dir);
    const fs::path partial_marker = out_dir / ".partial";
    write_text_file(partial_marker.string(), "run in progress or aborted\n");

    nlohmann::json manifest;
    manifest["tool_version"] = version_string;
    manifest["created_utc"] = detail::utc_timestamp();
    manifest["threads"] = threads;
    if (raw_config) {
        manifest["config"] = *raw_config;
        manifest["config_hash"] = detail::hex64(detail::fnv1a64(raw_config->dump()));
    }
    nlohmann::json timings = nlohmann::json::array();
    detail::StageClock clock;

    auto guard = [&](const char* stage, auto&& fn) {
        clock.start(stage);
        try {
            fn();
        } catch (const error& e) {
            throw pipeline_error(stage, e.what());
        } catch (const std::exception& e) {
            throw pipeline_error(stage, std::string("unexpected: ") + e.what());
        }
        clock.finish(timings);
    };

    ActivityMatrix train, val;
    guard("build-matrix", [&] {
        IngestResult r = ingest_trip_files(train_files, config.schema, config.grid,
                                           config.temporal, threads);
        train = std::move(r.matrix);
        if (train.all_zero())
            manifest["warnings"].push_back("training matrix is all zero");
        save_activity_matrix(train, (out_dir / "train.matrix").string());
        manifest["ingest"]["train"] =
            detail::stats_to_json(r.stats, train.dropped_count, train.total());

        IngestResult v = ingest_trip_files(val_files, config.schema, config.grid,
                                           *config.validation_temporal, threads);
        val = std::move(v.matrix);
        if (val.all_zero())
            manifest["warnings"].push_back("validation matrix is all zero");
        save_activity_matrix(val, (out_dir / "validation.matrix").string());
        manifest["ingest"]["validation"] =
            detail::stats_to_json(v.stats, val.dropped_count, val.total());
    });

    OrthonormalBasis basis;
    SweepCurve curve;
    OptimalCount best;
    guard("sweep", [&] {
        const std::int64_t hard_max =
            std::min<std::int64_t>(train.cell_count(), train.unit_count());
        basis = compute_basis(train, std::min(config.q_max, hard_max));
        curve = sweep_sensor_counts(basis, train.as_real(), val.as_real(), config.q_min,
                                    config.q_max, config.method);
        best = optimal_sensor_count(curve);
        std::ostringstream csv;
        csv.precision(12);
        csv << "q,train_rmse,val_rmse,condition,valid\n";
        for (const SweepPoint& p : curve.points)
            csv << p.q << "," << p.train_rmse << "," << p.validation_rmse << "," << p.condition
                << "," << (p.valid ? 1 : 0) << "\n";
        write_text_file((out_dir / "sweep.csv").string(), csv.str());
        save_basis(basis, (out_dir / "basis").string());
        manifest["sweep"] = {{"q_min", curve.q_min},
                             {"q_max", curve.q_max},
                             {"rank_limit", curve.rank_limit},
                             {"clamped", curve.clamped},
                             {"method", std::string(to_string(curve.method))},
                             {"chosen_q", best.q},
                             {"validation_rmse", best.validation_rmse},
                             {"boundary_minimum", best.boundary}};
    });

    SensorSet sensors;
    guard("select", [&] {
        sensors = select_sensors(basis, best.q, config.method);
        save_sensors(sensors, (out_dir / "sensors.json").string());
        write_text_file((out_dir / "sensors.geojson").string(),
                        sensors_to_geojson(sensors, config.grid).dump(2) + "\n");
        write_text_file((out_dir / "sensors.csv").string(), sensors_to_csv(sensors, config.grid));
        manifest["sensors"] = {{"indices", sensors.indices},
                               {"method", std::string(to_string(sensors.method))},
                               {"q", sensors.q()}};
    });

    ReconstructedMatrix recon;
    guard("simulate", [&] {
        recon = simulate_uneventful(basis, sensors, train);
        nlohmann::json extra{{"sensors", sensors.indices},
                             {"basis_rank", recon.basis_rank},
                             {"interpolation_condition", recon.interpolation_condition},
                             {"grid", detail::grid_to_json(config.grid)},
                             {"temporal", detail::temporal_to_json(config.temporal)}};
        save_dense_matrix(recon.values, (out_dir / "reconstruction").string(), std::move(extra));
        manifest["sensors"]["interpolation_condition"] = recon.interpolation_condition;
    });

    guard("detect", [&] {
        const EventReport report = build_event_report(train, recon, config.classes);
        manifest["detect"] = write_detect_outputs(report, config.grid, config.temporal,
                                                  out_dir / "detect", config.top_days);
        nlohmann::json top = nlohmann::json::array();
        const std::int64_t n =
            std::min<std::int64_t>(config.top_days,
                                   static_cast<std::int64_t>(report.ranked_days.size()));
        for (std::int64_t r = 0; r < n; ++r)
            top.push_back({{"unit", report.ranked_days[static_cast<std::size_t>(r)].unit},
                           {"date", config.temporal.unit_label(
                                        report.ranked_days[static_cast<std::size_t>(r)].unit)},
                           {"rmse", report.ranked_days[static_cast<std::size_t>(r)].rmse}});
        manifest["detect"]["top_days"] = top;
    });

    manifest["timings"] = timings;
    write_text_file((out_dir / "run_manifest.json").string(), manifest.dump(2) + "\n");
    fs::remove(partial_marker);
    return manifest;
}

} // namespace deimos
