#include "tnet/config.hpp"

#include "tnet/common.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace tnet::cli {

void RunConfig::validate() const {
    if (model != "pctn" && model != "itransformer" && model != "all")
        throw std::invalid_argument("model must be pctn, itransformer or all");
    if (synth_mode != "snapshots" && synth_mode != "celldays")
        throw std::invalid_argument("synth_mode must be snapshots or celldays");
    if (n_test_dates < 0) throw std::invalid_argument("n_test_dates must be non-negative");
    if (epochs <= 0 || patience <= 0) throw std::invalid_argument("epochs and patience must be positive");
    if (!(val_fraction > 0.0 && val_fraction < 0.5))
        throw std::invalid_argument("val_fraction must lie in (0, 0.5)");
    if (cells <= 0 || days <= 0) throw std::invalid_argument("cells and days must be positive");
    if (!parse_date(start_date)) throw std::invalid_argument("start_date must be YYYY-MM-DD");
    if (work_dir == input_dir || work_dir == report_dir)
        throw std::invalid_argument("input, work and report directories must be distinct");
}

void apply_config_line(RunConfig& c, const std::string& key, const std::string& value) {
    auto as_int = [&] { return std::stoi(value); };
    auto as_double = [&] { return std::stod(value); };
    if (key == "input_dir") c.input_dir = value;
    else if (key == "work_dir") c.work_dir = value;
    else if (key == "report_dir") c.report_dir = value;
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "model") c.model = value;
    else if (key == "n_test_dates") c.n_test_dates = as_int();
    else if (key == "epochs") c.epochs = as_int();
    else if (key == "batch") c.batch = as_int();
    else if (key == "lr") c.lr = as_double();
    else if (key == "lr_min") c.lr_min = as_double();
    else if (key == "weight_decay") c.weight_decay = as_double();
    else if (key == "patience") c.patience = as_int();
    else if (key == "val_fraction") c.val_fraction = as_double();
    else if (key == "cells") c.cells = as_int();
    else if (key == "days") c.days = as_int();
    else if (key == "synth_mode") c.synth_mode = value;
    else if (key == "start_date") c.start_date = value;
    else if (key == "weekend_multiplier") c.weekend_multiplier = as_double();
    else if (key == "fluct_floor_share") c.fluct_floor_share = as_double();
    else if (key == "holdout_fraction") c.holdout_fraction = as_double();
    else if (key == "verbose") c.verbose = value == "1" || value == "true";
    else throw std::invalid_argument("unknown config key: " + key);
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    RunConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            size_t x = s.find_first_not_of(" \t");
            size_t y = s.find_last_not_of(" \t");
            s = x == std::string::npos ? "" : s.substr(x, y - x + 1);
        };
        trim(key);
        trim(value);
        apply_config_line(c, key, value);
    }
    return c;
}

std::string config_echo(const RunConfig& c) {
    char buf[64];
    std::map<std::string, std::string> kv;
    kv["input_dir"] = c.input_dir;
    kv["work_dir"] = c.work_dir;
    kv["report_dir"] = c.report_dir;
    kv["seed"] = std::to_string(c.seed);
    kv["model"] = c.model;
    kv["n_test_dates"] = std::to_string(c.n_test_dates);
    kv["epochs"] = std::to_string(c.epochs);
    kv["batch"] = std::to_string(c.batch);
    std::snprintf(buf, sizeof(buf), "%.10g", c.lr);
    kv["lr"] = buf;
    std::snprintf(buf, sizeof(buf), "%.10g", c.lr_min);
    kv["lr_min"] = buf;
    std::snprintf(buf, sizeof(buf), "%.10g", c.weight_decay);
    kv["weight_decay"] = buf;
    kv["patience"] = std::to_string(c.patience);
    std::snprintf(buf, sizeof(buf), "%.10g", c.val_fraction);
    kv["val_fraction"] = buf;
    kv["cells"] = std::to_string(c.cells);
    kv["days"] = std::to_string(c.days);
    kv["synth_mode"] = c.synth_mode;
    kv["start_date"] = c.start_date;
    std::snprintf(buf, sizeof(buf), "%.10g", c.weekend_multiplier);
    kv["weekend_multiplier"] = buf;
    std::snprintf(buf, sizeof(buf), "%.10g", c.fluct_floor_share);
    kv["fluct_floor_share"] = buf;
    std::snprintf(buf, sizeof(buf), "%.10g", c.holdout_fraction);
    kv["holdout_fraction"] = buf;
    kv["verbose"] = c.verbose ? "1" : "0";
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

} // namespace tnet::cli
