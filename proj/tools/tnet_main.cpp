#include <CLI11.hpp>

#include "tnet/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>

using tnet::cli::RunConfig;

int main(int argc, char** argv) {
    // the config file is located first so CLI flags can override its values
    std::string config_path;
    for (int i = 1; i + 1 < argc; ++i) {
        std::string a = argv[i];
        if (a == "-c" || a == "--config") config_path = argv[i + 1];
    }
    RunConfig config;
    try {
        if (!config_path.empty()) config = tnet::cli::load_config_file(config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "tnet: error: %s\n", e.what());
        return 1;
    }

    CLI::App app{"tnet - adaptive alarm threshold engine"};
    app.require_subcommand(1);
    std::string ignored;
    app.add_option("-c,--config", ignored, "key=value run configuration file");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", ignored, "key=value run configuration file");
        sub->add_option("--input-dir", config.input_dir, "snapshot file directory");
        sub->add_option("--work-dir", config.work_dir, "pipeline artifact directory");
        sub->add_option("--report-dir", config.report_dir, "report output directory");
        sub->add_option("--seed", config.seed, "run seed (default 42)");
        sub->add_option("--model", config.model, "pctn | itransformer | all");
        sub->add_option("--n-test-dates", config.n_test_dates, "latest dates held out for test");
        sub->add_option("--epochs", config.epochs, "training epoch cap");
        sub->add_option("--batch", config.batch, "batch size (0 = model default)");
        sub->add_option("--lr", config.lr, "peak learning rate");
        sub->add_option("--patience", config.patience, "early stopping patience");
        sub->add_option("--val-fraction", config.val_fraction, "validation slice cap");
        sub->add_option("--cells", config.cells, "synthetic cell count");
        sub->add_option("--days", config.days, "synthetic day count");
        sub->add_option("--synth-mode", config.synth_mode, "snapshots | celldays");
        sub->add_option("--start-date", config.start_date, "first synthetic date YYYY-MM-DD");
        sub->add_flag("--verbose", config.verbose, "log per-epoch losses");
    };

    struct Stage {
        const char* name;
        const char* help;
        void (*run)(const RunConfig&);
    };
    const Stage stage_table[] = {
        {"synth", "generate synthetic alarm data", tnet::cli::run_synth},
        {"ingest", "parse snapshot files into cell-day records", tnet::cli::run_ingest},
        {"features", "build the standardized feature matrix", tnet::cli::run_features},
        {"label", "derive percentile threshold labels", tnet::cli::run_label},
        {"train", "train the selected model(s)", tnet::cli::run_train},
        {"predict", "predict thresholds for the test dates", tnet::cli::run_predict},
        {"evaluate", "compute metrics and significance tests", tnet::cli::run_evaluate},
        {"report", "write comparison and report files", tnet::cli::run_report},
        {"pipeline", "run every stage in order", tnet::cli::run_pipeline},
    };
    for (const auto& s : stage_table) add_common(app.add_subcommand(s.name, s.help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        std::fprintf(stderr, "%s", app.help().c_str());
        return 2;
    }

    std::string stage = app.get_subcommands().front()->get_name();
    try {
        if (const char* env = std::getenv("TNET_WORK_DIR")) config.work_dir = env;
        config.validate();
        for (const auto& s : stage_table)
            if (stage == s.name) {
                s.run(config);
                return 0;
            }
        std::fprintf(stderr, "tnet: unknown stage %s\n", stage.c_str());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "tnet %s: error: %s\n", stage.c_str(), e.what());
        return 1;
    }
}
