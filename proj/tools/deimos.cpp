// deimos command-line interface: builds activity matrices from trip
// CSVs, fits the component basis, places sensors, simulates the
// uneventful scenario, and reports events. `run` chains all stages;
// every stage is also invocable standalone through file handoffs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "deimos/activity.hpp"
#include "deimos/basis.hpp"
#include "deimos/config.hpp"
#include "deimos/container.hpp"
#include "deimos/detect.hpp"
#include "deimos/geojson.hpp"
#include "deimos/pipeline.hpp"
#include "deimos/report.hpp"
#include "deimos/sensors.hpp"
#include "deimos/simulate.hpp"
#include "deimos/sweep.hpp"
#include "deimos/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

deimos::SelectionMethod parse_method_or_throw(const std::string& name) {
    const auto m = deimos::parse_selection_method(name);
    if (!m) throw deimos::argument_error("unknown method '" + name + "', expected deim or naive");
    return *m;
}

struct InitArgs {
    std::string out = "deimos-config.json";
    bool force = false;
};

struct BuildArgs {
    std::string trips;
    std::string config;
    std::string out;
    std::string window = "train";
    unsigned threads = 0;
};

struct FitArgs {
    std::string matrix;
    std::int64_t max_rank = 0;
    std::string out;
};

struct SelectArgs {
    std::string basis;
    std::int64_t q = 0;
    std::string method = "deim";
    std::string out;
    std::string grid_from;
    std::string geojson;
    std::string csv;
};

struct SimulateArgs {
    std::string basis;
    std::string sensors;
    std::string matrix;
    std::string out;
};

struct SweepArgs {
    std::string train;
    std::string val;
    std::int64_t q_min = 1;
    std::int64_t q_max = 0;
    std::string method = "deim";
    std::string out;
};

struct DetectArgs {
    std::string matrix;
    std::string recon;
    std::int64_t top = 10;
    std::int64_t classes = 7;
    std::string out_dir;
};

struct RunArgs {
    std::string config;
    std::string out_dir;
    unsigned threads = 0;
};

int cmd_init(const InitArgs& args) {
    if (!args.force && fs::exists(args.out))
        throw deimos::io_error("'" + args.out + "' exists; use --force to overwrite");
    deimos::write_text_file(args.out, deimos::annotated_config_template());
    std::cout << "wrote config template to " << args.out << "\n";
    return 0;
}

int cmd_build_matrix(const BuildArgs& args) {
    const deimos::RunConfig config = deimos::load_config(args.config);
    deimos::TemporalSpec temporal = config.temporal;
    if (args.window == "validation") {
        if (!config.validation_temporal)
            throw deimos::config_error("--window validation requires a validation_temporal section");
        temporal = *config.validation_temporal;
    } else if (args.window != "train") {
        throw deimos::argument_error("--window must be 'train' or 'validation'");
    }
    const auto files = deimos::expand_glob(args.trips, fs::current_path());
    const unsigned threads = deimos::resolve_threads(args.threads);
    const deimos::IngestResult result =
        deimos::ingest_trip_files(files, config.schema, config.grid, temporal, threads);
    deimos::save_activity_matrix(result.matrix, args.out);
    std::cout << "files: " << files.size() << "\n"
              << "rows read: " << result.stats.rows_read << "\n"
              << "rows rejected: " << result.stats.rows_rejected << "\n"
              << "points: " << result.stats.points << "\n"
              << "dropped weight (out of grid/window): " << result.matrix.dropped_count << "\n"
              << "matrix total: " << result.matrix.total() << "\n"
              << "matrix: " << result.matrix.cell_count() << " cells x "
              << result.matrix.unit_count() << " units -> " << args.out << "\n";
    if (result.matrix.all_zero())
        std::cerr << "warning: no in-bounds points, the matrix is all zero\n";
    return 0;
}

int cmd_fit(const FitArgs& args) {
    const deimos::ActivityMatrix m = deimos::load_activity_matrix(args.matrix);
    const std::int64_t hard_max = std::min(m.cell_count(), m.unit_count());
    const std::int64_t max_rank = args.max_rank > 0 ? args.max_rank : hard_max;
    const deimos::OrthonormalBasis basis = deimos::compute_basis(m, max_rank);
    deimos::save_basis(basis, args.out);
    std::cout << "retained rank: " << basis.rank() << "\n"
              << "explained variance at rank: "
              << deimos::explained_variance(basis, basis.rank()) << "\n"
              << "basis -> " << args.out << "\n";
    return 0;
}

int cmd_select(const SelectArgs& args) {
    const deimos::OrthonormalBasis basis = deimos::load_basis(args.basis);
    const deimos::SensorSet sensors =
        deimos::select_sensors(basis, args.q, parse_method_or_throw(args.method));
    deimos::save_sensors(sensors, args.out);
    std::cout << "sensors (" << to_string(sensors.method) << "): " << sensors.describe() << "\n"
              << "interpolation condition: "
              << deimos::interpolation_condition(basis, sensors) << "\n"
              << "sensors -> " << args.out << "\n";
    if (!args.geojson.empty() || !args.csv.empty()) {
        if (args.grid_from.empty())
            throw deimos::argument_error(
                "--geojson/--csv need --grid-from <matrix> to geolocate cells");
        const deimos::ActivityMatrix m = deimos::load_activity_matrix(args.grid_from);
        if (!args.geojson.empty()) {
            deimos::write_text_file(args.geojson,
                                    deimos::sensors_to_geojson(sensors, m.grid).dump(2) + "\n");
            std::cout << "geojson -> " << args.geojson << "\n";
        }
        if (!args.csv.empty()) {
            deimos::write_text_file(args.csv, deimos::sensors_to_csv(sensors, m.grid));
            std::cout << "csv -> " << args.csv << "\n";
        }
    }
    return 0;
}

int cmd_simulate(const SimulateArgs& args) {
    const deimos::OrthonormalBasis basis = deimos::load_basis(args.basis);
    const deimos::SensorSet sensors = deimos::load_sensors(args.sensors);
    const deimos::ActivityMatrix obs = deimos::load_activity_matrix(args.matrix);
    const deimos::ReconstructedMatrix recon = deimos::simulate_uneventful(basis, sensors, obs);
    json extra{{"sensors", sensors.indices},
               {"basis_rank", recon.basis_rank},
               {"interpolation_condition", recon.interpolation_condition},
               {"grid", deimos::detail::grid_to_json(obs.grid)},
               {"temporal", deimos::detail::temporal_to_json(obs.temporal)}};
    deimos::save_dense_matrix(recon.values, args.out, std::move(extra));
    std::cout << "interpolation condition: " << recon.interpolation_condition << "\n"
              << "overall rmse vs observations: " << deimos::overall_rmse(obs, recon) << "\n"
              << "reconstruction -> " << args.out << "\n";
    return 0;
}

int cmd_sweep(const SweepArgs& args) {
    const deimos::ActivityMatrix train = deimos::load_activity_matrix(args.train);
    const deimos::ActivityMatrix val = deimos::load_activity_matrix(args.val);
    const std::int64_t q_max =
        args.q_max > 0 ? args.q_max : std::min(train.cell_count(), train.unit_count());
    const deimos::SweepCurve curve = deimos::sweep_sensor_counts(
        train, val, args.q_min, q_max, parse_method_or_throw(args.method));
    std::ostringstream csv;
    csv.precision(12);
    csv << "q,train_rmse,val_rmse,condition,valid\n";
    for (const deimos::SweepPoint& p : curve.points)
        csv << p.q << "," << p.train_rmse << "," << p.validation_rmse << "," << p.condition << ","
            << (p.valid ? 1 : 0) << "\n";
    deimos::write_text_file(args.out, csv.str());
    const deimos::OptimalCount best = deimos::optimal_sensor_count(curve);
    std::cout << "swept q in [" << curve.q_min << ", " << curve.q_max << "]"
              << (curve.clamped ? " (clamped to training rank)" : "") << "\n"
              << "optimal q: " << best.q << " (validation rmse " << best.validation_rmse << ")"
              << (best.boundary ? " [minimum on sweep boundary; widen the range]" : "") << "\n"
              << "curve -> " << args.out << "\n";
    return 0;
}

int cmd_detect(const DetectArgs& args) {
    const deimos::ActivityMatrix obs = deimos::load_activity_matrix(args.matrix);
    json recon_meta;
    const Eigen::MatrixXd recon = deimos::load_dense_matrix(args.recon, &recon_meta);
    const deimos::EventReport report =
        deimos::build_event_report(obs.as_real(), recon, args.classes);
    const json detect_summary = deimos::write_detect_outputs(
        report, obs.grid, obs.temporal, fs::path(args.out_dir), args.top);
    json manifest{{"tool_version", deimos::version_string},
                  {"observations", args.matrix},
                  {"reconstruction", args.recon},
                  {"detect", detect_summary}};
    if (recon_meta.contains("basis_rank")) manifest["basis_rank"] = recon_meta["basis_rank"];
    if (recon_meta.contains("interpolation_condition"))
        manifest["interpolation_condition"] = recon_meta["interpolation_condition"];
    deimos::write_text_file((fs::path(args.out_dir) / "detect_manifest.json").string(),
                            manifest.dump(2) + "\n");
    std::cout << "overall rmse: " << report.overall_rmse << "\n";
    const std::int64_t n =
        std::min<std::int64_t>(args.top, static_cast<std::int64_t>(report.ranked_days.size()));
    for (std::int64_t r = 0; r < n; ++r)
        std::cout << "rank " << (r + 1) << ": "
                  << obs.temporal.unit_label(report.ranked_days[static_cast<std::size_t>(r)].unit)
                  << " rmse " << report.ranked_days[static_cast<std::size_t>(r)].rmse << "\n";
    std::cout << "outputs -> " << args.out_dir << "\n";
    return 0;
}

int cmd_run(const RunArgs& args) {
    std::ifstream in(args.config);
    if (!in) throw deimos::config_error("config: cannot open '" + args.config + "'");
    json raw;
    try {
        raw = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw deimos::config_error("config: '" + args.config + "' is not valid JSON: " +
                                   std::string(e.what()));
    }
    deimos::RunConfig config = deimos::parse_config(raw);
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    if (args.threads > 0) config.threads = args.threads;
    const fs::path base_dir = fs::absolute(args.config).parent_path();
    const json manifest = deimos::run_pipeline(config, base_dir, &raw);
    std::cout << "chosen q: " << manifest["sweep"]["chosen_q"] << "\n"
              << "sensors: " << manifest["sensors"]["indices"].dump() << "\n"
              << "interpolation condition: " << manifest["sensors"]["interpolation_condition"]
              << "\n"
              << "top event days: " << manifest["detect"]["top_days"].dump() << "\n"
              << "manifest -> "
              << (fs::path(config.output_dir).is_absolute()
                      ? fs::path(config.output_dir) / "run_manifest.json"
                      : base_dir / config.output_dir / "run_manifest.json")
                     .string()
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deimos: optimal-sensor simulation for spatiotemporal event detection"};
    app.set_version_flag("--version", deimos::version_string);
    app.require_subcommand(1);

    InitArgs init_args;
    auto* init = app.add_subcommand("init", "write an annotated configuration template");
    init->add_option("--out", init_args.out, "output path")->capture_default_str();
    init->add_flag("--force", init_args.force, "overwrite an existing file");

    BuildArgs build_args;
    auto* build = app.add_subcommand("build-matrix", "aggregate trip CSVs into an activity matrix");
    build->add_option("--trips", build_args.trips, "trip CSV path or glob")->required();
    build->add_option("--config", build_args.config, "configuration file")->required();
    build->add_option("--out", build_args.out, "output matrix path")->required();
    build->add_option("--window", build_args.window, "temporal window: train or validation")
        ->capture_default_str();
    build->add_option("--threads", build_args.threads, "worker threads (0 = auto)");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "compute the dominant component basis of a matrix");
    fit->add_option("--matrix", fit_args.matrix, "activity matrix path")->required();
    fit->add_option("--max-rank", fit_args.max_rank, "components to retain (0 = min(x, k))");
    fit->add_option("--out", fit_args.out, "output basis path")->required();

    SelectArgs select_args;
    auto* select = app.add_subcommand("select", "choose sensor cells from a basis");
    select->add_option("--basis", select_args.basis, "basis path")->required();
    select->add_option("--q", select_args.q, "number of sensors")->required();
    select->add_option("--method", select_args.method, "deim or naive")->capture_default_str();
    select->add_option("--out", select_args.out, "output sensor file")->required();
    select->add_option("--grid-from", select_args.grid_from,
                       "activity matrix supplying the grid for exports");
    select->add_option("--geojson", select_args.geojson, "also export sensors as GeoJSON points");
    select->add_option("--csv", select_args.csv, "also export sensors as CSV");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate",
                                        "reconstruct the uneventful scenario from sensor rows");
    simulate->add_option("--basis", sim_args.basis, "basis path")->required();
    simulate->add_option("--sensors", sim_args.sensors, "sensor file")->required();
    simulate->add_option("--matrix", sim_args.matrix, "observation matrix")->required();
    simulate->add_option("--out", sim_args.out, "output reconstruction path")->required();

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "pick the sensor count by validation RMSE");
    sweep->add_option("--train", sweep_args.train, "training matrix")->required();
    sweep->add_option("--val", sweep_args.val, "validation matrix")->required();
    sweep->add_option("--q-min", sweep_args.q_min, "smallest count")->capture_default_str();
    sweep->add_option("--q-max", sweep_args.q_max, "largest count (0 = training rank)");
    sweep->add_option("--method", sweep_args.method, "deim or naive")->capture_default_str();
    sweep->add_option("--out", sweep_args.out, "output curve CSV")->required();

    DetectArgs detect_args;
    auto* detect = app.add_subcommand("detect", "compare observations with a reconstruction");
    detect->add_option("--matrix", detect_args.matrix, "observation matrix")->required();
    detect->add_option("--recon", detect_args.recon, "reconstruction path")->required();
    detect->add_option("--top", detect_args.top, "units to export as GeoJSON")
        ->capture_default_str();
    detect->add_option("--classes", detect_args.classes, "natural-breaks classes")
        ->capture_default_str();
    detect->add_option("--out-dir", detect_args.out_dir, "output directory")->required();

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "execute the full pipeline from a configuration");
    run->add_option("--config", run_args.config, "configuration file")->required();
    run->add_option("--out-dir", run_args.out_dir, "override output_dir");
    run->add_option("--threads", run_args.threads, "override worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (init->parsed()) return cmd_init(init_args);
        if (build->parsed()) return cmd_build_matrix(build_args);
        if (fit->parsed()) return cmd_fit(fit_args);
        if (select->parsed()) return cmd_select(select_args);
        if (simulate->parsed()) return cmd_simulate(sim_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args);
        if (detect->parsed()) return cmd_detect(detect_args);
        if (run->parsed()) return cmd_run(run_args);
    } catch (const deimos::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const deimos::argument_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const deimos::format_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const deimos::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const deimos::numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const deimos::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
