#pragma once

#include <cstdint>
#include <string>

namespace tnet::cli {

// Plain key=value run configuration; CLI flags override file values and the
// TNET_WORK_DIR environment variable overrides work_dir last.
struct RunConfig {
    std::string input_dir = "data/input";
    std::string work_dir = "data/work";
    std::string report_dir = "data/report";
    std::uint64_t seed = 42;
    std::string model = "pctn"; // pctn | itransformer | all
    int n_test_dates = 3;

    // training
    int epochs = 60;
    int batch = 0; // 0 picks the per-model default (256 pctn, 64 itransformer)
    double lr = 1e-3;
    double lr_min = 1e-5;
    double weight_decay = 0.01;
    int patience = 8;
    double val_fraction = 0.1;

    // synthetic data
    int cells = 120;
    int days = 10;
    std::string synth_mode = "snapshots"; // snapshots | celldays
    std::string start_date = "2024-01-05";
    double weekend_multiplier = 4.3;
    double fluct_floor_share = 0.943;

    // label stage
    double holdout_fraction = 0.15;

    bool verbose = false;

    void validate() const; // throws std::invalid_argument
};

RunConfig load_config_file(const std::string& path); // applied over defaults
void apply_config_line(RunConfig& config, const std::string& key, const std::string& value);
std::string config_echo(const RunConfig& config); // sorted key=value block

} // namespace tnet::cli
