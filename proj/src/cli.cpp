#include "tnet/cli.hpp"

#include "tnet/csv.hpp"
#include "tnet/eval.hpp"
#include "tnet/itransformer.hpp"
#include "tnet/labels.hpp"
#include "tnet/nn/checkpoint.hpp"
#include "tnet/pctn.hpp"
#include "tnet/synth.hpp"
#include "tnet/trainer.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tnet::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

synth::SynthConfig synth_config(const RunConfig& c) {
    synth::SynthConfig s;
    s.n_cells = c.cells;
    s.n_days = c.days;
    s.seed = c.seed;
    s.start_date = *parse_date(c.start_date);
    s.weekend_multiplier = c.weekend_multiplier;
    s.fluct_floor_share = c.fluct_floor_share;
    return s;
}

train::TrainConfig train_config(const RunConfig& c, const std::string& model) {
    train::TrainConfig t;
    t.epochs = c.epochs;
    t.batch_size = c.batch > 0 ? c.batch : (model == "itransformer" ? 64 : 256);
    t.lr_max = c.lr;
    t.lr_min = c.lr_min;
    t.weight_decay = c.weight_decay;
    t.patience = c.patience;
    t.val_fraction = c.val_fraction;
    t.shuffle_seed = c.seed;
    t.verbose = c.verbose;
    return t;
}

std::vector<std::string> selected_models(const RunConfig& c) {
    if (c.model == "all") return {"pctn", "itransformer"};
    return {c.model};
}

std::string work_path(const RunConfig& c, const std::string& name) {
    return (fs::path(c.work_dir) / name).string();
}
std::string report_path(const RunConfig& c, const std::string& name) {
    return (fs::path(c.report_dir) / name).string();
}

void write_training_log(const std::string& path, const train::TrainLog& log) {
    std::ofstream out(path, std::ios::binary);
    out << "epochs_run " << log.epochs_run << "\n";
    out << "best_epoch " << log.best_epoch << "\n";
    out << "best_val " << fmt(log.best_val, "%.8f") << "\n";
    out << "early_stopped " << (log.early_stopped ? 1 : 0) << "\n";
    for (size_t i = 0; i < log.train_losses.size(); ++i)
        out << "epoch " << i << " train " << fmt(log.train_losses[i], "%.8f") << " val "
            << fmt(log.val_losses[i], "%.8f") << "\n";
}

std::vector<const feat::Sample*> test_samples(const feat::Dataset& ds) {
    std::vector<const feat::Sample*> out;
    for (size_t i : ds.test_indices()) out.push_back(&ds.samples[i]);
    return out;
}

// predictions aligned with test_samples() order
struct LoadedPredictions {
    std::vector<std::array<double, 4>> t_hat;
};

LoadedPredictions read_predictions(const std::string& path,
                                   const std::vector<const feat::Sample*>& test) {
    csv::Table t = csv::read_file(path);
    if (t.rows.size() != test.size())
        throw std::runtime_error("prediction row count does not match the test set: " + path);
    int c0 = t.column("t1_hat");
    if (c0 < 0 || t.column("t4_hat") != c0 + 3)
        throw std::runtime_error("prediction file lacks t1_hat..t4_hat columns: " + path);
    LoadedPredictions p;
    p.t_hat.reserve(test.size());
    for (size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        if (row[0] != test[i]->key.cell_id || row[1] != format_date(test[i]->key.date) ||
            row[2] != std::to_string(test[i]->key.start_hour))
            throw std::runtime_error("prediction keys are misaligned with the dataset: " + path);
        p.t_hat.push_back({std::stod(row[static_cast<size_t>(c0)]),
                           std::stod(row[static_cast<size_t>(c0 + 1)]),
                           std::stod(row[static_cast<size_t>(c0 + 2)]),
                           std::stod(row[static_cast<size_t>(c0 + 3)])});
    }
    return p;
}

std::array<std::vector<double>, 4> label_columns(const std::vector<const feat::Sample*>& rows) {
    std::array<std::vector<double>, 4> y;
    for (const auto* s : rows)
        for (int t = 0; t < 4; ++t) y[static_cast<size_t>(t)].push_back(s->y.target(t));
    return y;
}

// metrics + per-sample error series for every available model (naive first)
struct Evaluation {
    std::vector<eval::ModelMetrics> metrics;
    std::vector<std::pair<std::string, std::vector<double>>> per_sample_errors;
};

Evaluation evaluate_available(const RunConfig& c, const feat::Dataset& ds) {
    auto test = test_samples(ds);
    if (test.empty()) throw std::runtime_error("evaluate: empty test set");
    std::vector<const feat::Sample*> train;
    for (size_t i : ds.train_indices()) train.push_back(&ds.samples[i]);
    auto y_test = label_columns(test);
    auto y_train = label_columns(train);

    Evaluation ev;
    ev.metrics.push_back(eval::naive_baseline(y_train, y_test));
    std::array<double, 4> train_means{};
    for (int t = 0; t < 4; ++t) {
        double m = 0;
        for (double v : y_train[static_cast<size_t>(t)]) m += v;
        train_means[static_cast<size_t>(t)] = m / static_cast<double>(y_train[static_cast<size_t>(t)].size());
    }
    std::vector<double> naive_errors;
    for (const auto* s : test)
        naive_errors.push_back(eval::per_sample_error(
            train_means, {s->y.target(0), s->y.target(1), s->y.target(2), s->y.target(3)}));
    ev.per_sample_errors.emplace_back("naive_mean", std::move(naive_errors));

    for (const auto& model : selected_models(c)) {
        std::string path = work_path(c, "predictions_" + model + ".csv");
        if (!fs::exists(path))
            throw std::runtime_error("evaluate: missing predictions file " + path +
                                     " (run predict first)");
        auto preds = read_predictions(path, test);
        std::array<std::vector<double>, 4> yhat;
        std::vector<double> errors;
        for (size_t i = 0; i < test.size(); ++i) {
            for (int t = 0; t < 4; ++t)
                yhat[static_cast<size_t>(t)].push_back(preds.t_hat[i][static_cast<size_t>(t)]);
            errors.push_back(eval::per_sample_error(
                preds.t_hat[i], {test[i]->y.target(0), test[i]->y.target(1), test[i]->y.target(2),
                                 test[i]->y.target(3)}));
        }
        ev.metrics.push_back(eval::evaluate_model(model, y_test, yhat));
        ev.per_sample_errors.emplace_back(model, std::move(errors));
    }
    return ev;
}

} // namespace

void write_run_manifest(const RunConfig& c, const std::string& stage) {
    fs::create_directories(c.work_dir);
    std::ofstream out(work_path(c, "run_manifest.txt"), std::ios::binary);
    out << "tnet_version " << kVersion << "\n";
    out << "stage " << stage << "\n";
    out << "config:\n" << config_echo(c);
    out << "artifacts:\n";
    std::vector<std::string> names = {"celldays.csv",
                                      "synth_audit.csv",
                                      "features.csv",
                                      "features_manifest.txt",
                                      "dataset.csv",
                                      "label_manifest.txt",
                                      "pctn.ckpt",
                                      "itransformer.ckpt",
                                      "predictions_pctn.csv",
                                      "alpha_detail_pctn.csv",
                                      "predictions_itransformer.csv"};
    for (const auto& n : names) {
        std::string p = work_path(c, n);
        if (!fs::exists(p)) continue;
        std::ifstream in(p, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a(bytes)));
        out << "hash " << n << " " << buf << "\n";
    }
}

void run_synth(const RunConfig& c) {
    auto scfg = synth_config(c);
    fs::create_directories(c.work_dir);
    auto days = synth::generate_cell_days(scfg);
    synth::write_audit(work_path(c, "synth_audit.csv"), synth::distribution_audit(days));
    if (c.synth_mode == "snapshots") {
        fs::create_directories(c.input_dir);
        synth::write_snapshot_files(scfg, c.input_dir);
    } else {
        ingest::write_cell_days(work_path(c, "celldays.csv"), days);
    }
    write_run_manifest(c, "synth");
}

void run_ingest(const RunConfig& c) {
    fs::create_directories(c.work_dir);
    ingest::IngestSummary summary;
    auto days = ingest::ingest_directory(c.input_dir, &summary);
    ingest::write_cell_days(work_path(c, "celldays.csv"), days);
    std::ofstream mf(work_path(c, "ingest_manifest.txt"), std::ios::binary);
    mf << "files " << summary.files << "\n"
       << "rows " << summary.rows << "\n"
       << "rows_skipped " << summary.rows_skipped << "\n"
       << "unknown_vendor_rows " << summary.unknown_vendor_rows << "\n"
       << "spill_dropped " << summary.spill_dropped << "\n"
       << "cell_days " << days.size() << "\n";
    write_run_manifest(c, "ingest");
}

void run_features(const RunConfig& c) {
    auto days = ingest::read_cell_days(work_path(c, "celldays.csv"));
    auto ds = feat::build_dataset(days, c.n_test_dates);
    feat::write_features_csv(work_path(c, "features.csv"), ds);
    feat::write_manifest(work_path(c, "features_manifest.txt"), ds);
    write_run_manifest(c, "features");
}

void run_label(const RunConfig& c) {
    auto days = ingest::read_cell_days(work_path(c, "celldays.csv"));
    auto ds = feat::read_features_csv(work_path(c, "features.csv"), c.n_test_dates);

    std::map<std::pair<std::string, Date>, const ingest::CellDay*> index;
    for (const auto& cd : days) index[{cd.cell_id, cd.date}] = &cd;
    long floor_t3 = 0, floor_t4 = 0;
    for (auto& smp : ds.samples) {
        auto it = index.find({smp.key.cell_id, smp.key.date});
        if (it == index.end())
            throw std::runtime_error("label: feature row without a matching cell-day: " +
                                     smp.key.cell_id);
        smp.y = labels::derive_labels(it->second->hourly_inactive, it->second->hourly_fluct,
                                      smp.key.start_hour);
        if (smp.y.t3_fluct == 1.0) ++floor_t3;
        if (smp.y.t4_hour_fluct == 1.0) ++floor_t4;
    }
    feat::write_dataset_csv(work_path(c, "dataset.csv"), ds);

    std::ofstream mf(work_path(c, "label_manifest.txt"), std::ios::binary);
    mf << "samples " << ds.samples.size() << "\n";
    mf << "floor_share_t3 "
       << fmt(static_cast<double>(floor_t3) / static_cast<double>(ds.samples.size()), "%.6f")
       << "\n";
    mf << "floor_share_t4 "
       << fmt(static_cast<double>(floor_t4) / static_cast<double>(ds.samples.size()), "%.6f")
       << "\n";
    auto ks = labels::ks_holdout_check(days, c.holdout_fraction, c.seed);
    for (int t = 0; t < 4; ++t)
        mf << "ks_" << eval::kTargetNames[static_cast<size_t>(t)] << " stat "
           << fmt(ks[static_cast<size_t>(t)].statistic, "%.6f") << " p "
           << fmt(ks[static_cast<size_t>(t)].p_value, "%.6f") << "\n";
    write_run_manifest(c, "label");
}

void run_train(const RunConfig& c) {
    auto ds = feat::read_dataset_csv(work_path(c, "dataset.csv"), c.n_test_dates);
    for (const auto& model_name : selected_models(c)) {
        auto tcfg = train_config(c, model_name);
        if (model_name == "pctn") {
            pctn::PctnConfig mcfg;
            mcfg.seed = c.seed;
            pctn::PctnModel model(mcfg);
            auto log = train::train_pctn(model, ds, tcfg);
            nn::save_checkpoint(work_path(c, "pctn.ckpt"), "pctn", c.seed, model.params());
            write_training_log(work_path(c, "training_log_pctn.txt"), log);
        } else {
            itf::ITransformerConfig mcfg;
            mcfg.seed = c.seed;
            itf::ITransformerModel model(mcfg);
            auto log = train::train_itransformer(model, ds, tcfg);
            nn::save_checkpoint(work_path(c, "itransformer.ckpt"), "itransformer", c.seed,
                                model.params());
            write_training_log(work_path(c, "training_log_itransformer.txt"), log);
        }
    }
    write_run_manifest(c, "train");
}

void run_predict(const RunConfig& c) {
    auto ds = feat::read_dataset_csv(work_path(c, "dataset.csv"), c.n_test_dates);
    auto test = test_samples(ds);
    if (test.empty()) throw std::runtime_error("predict: empty test set");

    for (const auto& model_name : selected_models(c)) {
        if (model_name == "pctn") {
            pctn::PctnConfig mcfg;
            mcfg.seed = c.seed;
            pctn::PctnModel model(mcfg);
            nn::load_checkpoint(work_path(c, "pctn.ckpt"), "pctn", model.params());
            auto outputs = model.predict(test);

            csv::Table t;
            t.header = {"cell_id", "date", "start_hour", "t1_hat", "t2_hat", "t3_hat", "t4_hat",
                        "mu2", "sigma2", "alpha2", "gate3", "gate4"};
            csv::Table alpha;
            alpha.header = {"cell_id", "date", "start_hour", "alpha1", "alpha2", "alpha3",
                            "alpha4"};
            for (size_t i = 0; i < test.size(); ++i) {
                const auto& o = outputs[i];
                const auto& k = test[i]->key;
                t.rows.push_back({k.cell_id, format_date(k.date), std::to_string(k.start_hour),
                                  fmt(o.t_hat[0]), fmt(o.t_hat[1]), fmt(o.t_hat[2]),
                                  fmt(o.t_hat[3]), fmt(o.mu[1]), fmt(o.sigma[1]), fmt(o.alpha[1]),
                                  fmt(o.gate_total), fmt(o.gate_hourly)});
                alpha.rows.push_back({k.cell_id, format_date(k.date),
                                      std::to_string(k.start_hour), fmt(o.alpha[0]),
                                      fmt(o.alpha[1]), fmt(o.alpha[2]), fmt(o.alpha[3])});
            }
            csv::write_file(work_path(c, "predictions_pctn.csv"), t);
            csv::write_file(work_path(c, "alpha_detail_pctn.csv"), alpha);
        } else {
            itf::ITransformerConfig mcfg;
            mcfg.seed = c.seed;
            itf::ITransformerModel model(mcfg);
            nn::load_checkpoint(work_path(c, "itransformer.ckpt"), "itransformer",
                                model.params());
            auto outputs = model.predict(test);

            csv::Table t;
            t.header = {"cell_id", "date", "start_hour", "t1_hat", "t2_hat", "t3_hat", "t4_hat"};
            for (int target = 1; target <= 4; ++target)
                for (const char* q : {"q10", "q50", "q90", "spread"})
                    t.header.push_back(std::string(q) + "_t" + std::to_string(target));
            for (size_t i = 0; i < test.size(); ++i) {
                const auto& o = outputs[i];
                const auto& k = test[i]->key;
                std::vector<std::string> row = {k.cell_id, format_date(k.date),
                                                std::to_string(k.start_hour)};
                for (int target = 0; target < 4; ++target)
                    row.push_back(fmt(o.q90[static_cast<size_t>(target)])); // P90 is the threshold
                for (int target = 0; target < 4; ++target) {
                    row.push_back(fmt(o.q10[static_cast<size_t>(target)]));
                    row.push_back(fmt(o.q50[static_cast<size_t>(target)]));
                    row.push_back(fmt(o.q90[static_cast<size_t>(target)]));
                    row.push_back(fmt(o.spread[static_cast<size_t>(target)]));
                }
                t.rows.push_back(std::move(row));
            }
            csv::write_file(work_path(c, "predictions_itransformer.csv"), t);
        }
    }
    write_run_manifest(c, "predict");
}

void run_evaluate(const RunConfig& c) {
    auto ds = feat::read_dataset_csv(work_path(c, "dataset.csv"), c.n_test_dates);
    auto ev = evaluate_available(c, ds);
    fs::create_directories(c.report_dir);
    eval::write_metrics_csv(report_path(c, "metrics.csv"), ev.metrics);

    std::vector<eval::WilcoxonRow> rows;
    for (size_t a = 0; a < ev.per_sample_errors.size(); ++a)
        for (size_t b = a + 1; b < ev.per_sample_errors.size(); ++b) {
            eval::WilcoxonRow row;
            row.model_a = ev.per_sample_errors[a].first;
            row.model_b = ev.per_sample_errors[b].first;
            row.result = eval::wilcoxon_signed_rank(ev.per_sample_errors[a].second,
                                                    ev.per_sample_errors[b].second);
            rows.push_back(std::move(row));
        }
    eval::write_wilcoxon_csv(report_path(c, "wilcoxon.csv"), rows);
    write_run_manifest(c, "evaluate");
}

void run_report(const RunConfig& c) {
    auto ds = feat::read_dataset_csv(work_path(c, "dataset.csv"), c.n_test_dates);
    auto ev = evaluate_available(c, ds);
    fs::create_directories(c.report_dir);
    eval::write_metrics_text(report_path(c, "metrics.txt"), ev.metrics);

    std::string alpha_path = work_path(c, "alpha_detail_pctn.csv");
    if (fs::exists(alpha_path)) {
        csv::Table t = csv::read_file(alpha_path);
        std::vector<std::array<double, 4>> alphas;
        for (const auto& row : t.rows)
            alphas.push_back({std::stod(row[3]), std::stod(row[4]), std::stod(row[5]),
                              std::stod(row[6])});
        eval::write_alpha_csv(report_path(c, "alpha_stats.csv"), eval::alpha_stats(alphas));
    }
    std::string itf_path = work_path(c, "predictions_itransformer.csv");
    if (fs::exists(itf_path)) {
        csv::Table t = csv::read_file(itf_path);
        int c0 = t.column("spread_t1");
        std::vector<std::array<double, 4>> spreads;
        for (const auto& row : t.rows)
            spreads.push_back({std::stod(row[static_cast<size_t>(c0)]),
                               std::stod(row[static_cast<size_t>(c0 + 4)]),
                               std::stod(row[static_cast<size_t>(c0 + 8)]),
                               std::stod(row[static_cast<size_t>(c0 + 12)])});
        eval::write_spread_csv(report_path(c, "quantile_spread.csv"),
                               eval::quantile_spread_report(spreads));
    }
    write_run_manifest(c, "report");
}

void run_pipeline(const RunConfig& c) {
    run_synth(c);
    if (c.synth_mode == "snapshots") run_ingest(c);
    run_features(c);
    run_label(c);
    run_train(c);
    run_predict(c);
    run_evaluate(c);
    run_report(c);
    write_run_manifest(c, "pipeline");
}

} // namespace tnet::cli
