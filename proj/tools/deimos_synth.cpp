// Generates a small synthetic trip dataset with planted events plus a
// matching config, for demos and smoke runs:
//   deimos-synth --out-dir demo-data
//   deimos run --config demo-data/config.json

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "trip_fixture.hpp"

int main(int argc, char** argv) {
    CLI::App app{"deimos-synth: generate a synthetic trip-data fixture with planted events"};
    std::string out_dir = "demo-data";
    std::uint64_t seed = 20090101;
    app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "fixture seed")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        deimos::fixture::FixtureSpec spec;
        spec.seed = seed;
        const auto data = deimos::fixture::write_fixture(out_dir, spec);
        std::cout << "fixture -> " << out_dir << " (train.csv, val.csv, config.json)\n"
                  << "grid: " << spec.grid.num_rows << " x " << spec.grid.num_cols << " cells, "
                  << spec.train_window.num_units << " train days, "
                  << spec.val_window.num_units << " validation days\n"
                  << "signal rank: " << spec.rank << "\n"
                  << "planted train events (date, cells, trips per cell):\n";
        for (const auto& e : spec.train_events) {
            std::cout << "  " << spec.train_window.unit_label(e.unit) << " cells [";
            for (std::size_t i = 0; i < e.cells.size(); ++i)
                std::cout << (i ? "," : "") << e.cells[i];
            std::cout << "] +" << e.trips_per_cell << "\n";
        }
        std::cout << "expected train matrix total: " << data.train_counts.sum() << "\n"
                  << "next: deimos run --config " << out_dir << "/config.json\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
