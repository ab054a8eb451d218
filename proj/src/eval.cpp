#include "tnet/eval.hpp"

#include "tnet/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tnet::eval {

namespace {

double normal_sf(double z) { // P(Z > z)
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string fmt_r2(const Metrics& m) {
    return m.r2_defined ? fmt(m.r2) : "undefined";
}

} // namespace

Metrics metrics(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.empty() || y.size() != yhat.size())
        throw std::domain_error("metrics: inputs must be equal-length and non-empty");
    double n = static_cast<double>(y.size());
    double abs_sum = 0, sq_sum = 0, mean = 0;
    for (double v : y) mean += v;
    mean /= n;
    double sst = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        double r = y[i] - yhat[i];
        abs_sum += std::abs(r);
        sq_sum += r * r;
        sst += (y[i] - mean) * (y[i] - mean);
    }
    Metrics m;
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sq_sum / n);
    if (sst > 0) {
        m.r2 = 1.0 - sq_sum / sst;
    } else if (sq_sum == 0) {
        m.r2 = 0.0;
    } else {
        m.r2 = -std::numeric_limits<double>::infinity();
        m.r2_defined = false;
    }
    return m;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& errors_a,
                                    const std::vector<double>& errors_b) {
    if (errors_a.size() != errors_b.size())
        throw std::domain_error("wilcoxon: paired samples must have equal length");
    std::vector<double> diffs;
    diffs.reserve(errors_a.size());
    for (size_t i = 0; i < errors_a.size(); ++i) {
        double d = errors_a[i] - errors_b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    WilcoxonResult res;
    res.n_used = static_cast<int>(diffs.size());
    if (diffs.empty()) {
        res.degenerate = true;
        res.p_value = 1.0;
        return res;
    }
    int n = res.n_used;

    // midranks of |d|, doubled so every rank is integral
    std::vector<int> order(diffs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        return std::abs(diffs[static_cast<size_t>(i)]) < std::abs(diffs[static_cast<size_t>(j)]);
    });
    std::vector<long> rank2(diffs.size()); // 2 * midrank
    std::vector<long> tie_sizes;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() &&
               std::abs(diffs[static_cast<size_t>(order[j + 1])]) ==
                   std::abs(diffs[static_cast<size_t>(order[i])]))
            ++j;
        long lo = static_cast<long>(i) + 1, hi = static_cast<long>(j) + 1;
        for (size_t k = i; k <= j; ++k) rank2[static_cast<size_t>(order[k])] = lo + hi; // 2*avg
        if (hi > lo) tie_sizes.push_back(hi - lo + 1);
        i = j + 1;
    }

    long w2 = 0; // 2 * W+
    for (size_t k = 0; k < diffs.size(); ++k)
        if (diffs[k] > 0) w2 += rank2[k];
    res.statistic = static_cast<double>(w2) / 2.0;

    if (n <= 12) {
        res.exact = true;
        // enumerate all 2^n sign assignments of the doubled ranks
        long total = 1L << n;
        long le = 0, ge = 0;
        for (long mask = 0; mask < total; ++mask) {
            long s = 0;
            for (int b = 0; b < n; ++b)
                if (mask & (1L << b)) s += rank2[static_cast<size_t>(b)];
            if (s <= w2) ++le;
            if (s >= w2) ++ge;
        }
        double p = 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
        res.p_value = std::min(1.0, p);
        return res;
    }

    double dn = n;
    double mean = dn * (dn + 1.0) / 4.0;
    double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0;
    for (long t : tie_sizes) var -= (static_cast<double>(t) * t * t - t) / 48.0;
    double w = res.statistic;
    double delta = w - mean;
    double z = 0;
    if (std::abs(delta) > 0.5 && var > 0)
        z = (delta - (delta > 0 ? 0.5 : -0.5)) / std::sqrt(var);
    res.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(z)));
    return res;
}

double per_sample_error(const std::array<double, 4>& pred, const std::array<double, 4>& label) {
    double s = 0;
    for (int i = 0; i < 4; ++i) s += std::abs(pred[static_cast<size_t>(i)] -
                                              label[static_cast<size_t>(i)]);
    return s / 4.0;
}

KsResult ks_two_sample(std::vector<double> x, std::vector<double> y) {
    if (x.empty() || y.empty()) throw std::domain_error("ks_two_sample: empty sample");
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    size_t ix = 0, iy = 0;
    double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
    double d = 0;
    while (ix < x.size() && iy < y.size()) {
        double v = std::min(x[ix], y[iy]);
        while (ix < x.size() && x[ix] == v) ++ix;
        while (iy < y.size() && y[iy] == v) ++iy;
        d = std::max(d, std::abs(static_cast<double>(ix) / nx - static_cast<double>(iy) / ny));
    }
    d = std::max(d, std::abs(1.0 - static_cast<double>(iy) / ny));
    d = std::max(d, std::abs(static_cast<double>(ix) / nx - 1.0));

    KsResult res;
    res.statistic = d;
    double ne = nx * ny / (nx + ny);
    double lambda = std::sqrt(ne) * d;
    if (lambda < 1e-3) {
        res.p_value = 1.0;
        return res;
    }
    double p = 0;
    for (int j = 1; j <= 100; ++j) {
        double term = 2.0 * (j % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-12) break;
    }
    res.p_value = std::clamp(p, 0.0, 1.0);
    return res;
}

namespace {
Metrics average_metrics(const std::array<Metrics, 4>& per_target) {
    Metrics avg;
    avg.mae = 0;
    avg.rmse = 0;
    avg.r2 = 0;
    for (const auto& m : per_target) {
        avg.mae += m.mae / 4.0;
        avg.rmse += m.rmse / 4.0;
        avg.r2_defined = avg.r2_defined && m.r2_defined;
    }
    if (avg.r2_defined)
        for (const auto& m : per_target) avg.r2 += m.r2 / 4.0;
    else
        avg.r2 = -std::numeric_limits<double>::infinity();
    return avg;
}
} // namespace

ModelMetrics evaluate_model(const std::string& name,
                            const std::array<std::vector<double>, 4>& y,
                            const std::array<std::vector<double>, 4>& yhat) {
    ModelMetrics mm;
    mm.model = name;
    for (int t = 0; t < 4; ++t)
        mm.per_target[static_cast<size_t>(t)] =
            metrics(y[static_cast<size_t>(t)], yhat[static_cast<size_t>(t)]);
    mm.average = average_metrics(mm.per_target);
    return mm;
}

ModelMetrics naive_baseline(const std::array<std::vector<double>, 4>& train_labels,
                            const std::array<std::vector<double>, 4>& test_labels) {
    std::array<std::vector<double>, 4> preds;
    for (int t = 0; t < 4; ++t) {
        const auto& train = train_labels[static_cast<size_t>(t)];
        if (train.empty()) throw std::domain_error("naive_baseline: empty training labels");
        double mean = std::accumulate(train.begin(), train.end(), 0.0) /
                      static_cast<double>(train.size());
        preds[static_cast<size_t>(t)].assign(test_labels[static_cast<size_t>(t)].size(), mean);
    }
    return evaluate_model("naive_mean", test_labels, preds);
}

void write_metrics_csv(const std::string& path, const std::vector<ModelMetrics>& models) {
    csv::Table t;
    t.header = {"model", "target", "mae", "rmse", "r2"};
    for (const auto& mm : models) {
        for (int i = 0; i < 4; ++i) {
            const auto& m = mm.per_target[static_cast<size_t>(i)];
            t.rows.push_back({mm.model, kTargetNames[static_cast<size_t>(i)], fmt(m.mae),
                              fmt(m.rmse), fmt_r2(m)});
        }
        t.rows.push_back({mm.model, "average", fmt(mm.average.mae), fmt(mm.average.rmse),
                          fmt_r2(mm.average)});
    }
    csv::write_file(path, t);
}

void write_metrics_text(const std::string& path, const std::vector<ModelMetrics>& models) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    const char* metric_names[3] = {"MAE", "RMSE", "R2"};

    char buf[64];
    out << "Model comparison (best value per row marked with *)\n\n";
    std::snprintf(buf, sizeof(buf), "%-6s %-24s", "Metric", "Target");
    out << buf;
    for (const auto& mm : models) {
        std::snprintf(buf, sizeof(buf), " %20s", mm.model.c_str());
        out << buf;
    }
    out << '\n';

    for (int metric = 0; metric < 3; ++metric) {
        for (int row = 0; row < 5; ++row) { // four targets then the average
            std::string target = row < 4 ? kTargetNames[static_cast<size_t>(row)] : "average";
            std::snprintf(buf, sizeof(buf), "%-6s %-24s", metric_names[metric], target.c_str());
            out << buf;
            // collect values to find the best (min for errors, max for R2)
            std::vector<double> vals;
            for (const auto& mm : models) {
                const Metrics& m = row < 4 ? mm.per_target[static_cast<size_t>(row)] : mm.average;
                double v = metric == 0 ? m.mae : metric == 1 ? m.rmse
                                               : (m.r2_defined ? m.r2
                                                               : -std::numeric_limits<double>::infinity());
                vals.push_back(v);
            }
            double best = metric == 2 ? *std::max_element(vals.begin(), vals.end())
                                      : *std::min_element(vals.begin(), vals.end());
            for (size_t c = 0; c < models.size(); ++c) {
                const Metrics& m = row < 4 ? models[c].per_target[static_cast<size_t>(row)]
                                           : models[c].average;
                std::string cell = metric == 0 ? fmt(m.mae) : metric == 1 ? fmt(m.rmse)
                                                                          : fmt_r2(m);
                if (vals[c] == best) cell += "*";
                std::snprintf(buf, sizeof(buf), " %20s", cell.c_str());
                out << buf;
            }
            out << '\n';
        }
        out << '\n';
    }
}

void write_wilcoxon_csv(const std::string& path, const std::vector<WilcoxonRow>& rows) {
    csv::Table t;
    t.header = {"model_a", "model_b", "statistic", "p_value", "n_used", "mode", "degenerate"};
    for (const auto& r : rows)
        t.rows.push_back({r.model_a, r.model_b, fmt(r.result.statistic, "%.4f"),
                          fmt(r.result.p_value, "%.6g"), std::to_string(r.result.n_used),
                          r.result.exact ? "exact" : "normal",
                          r.result.degenerate ? "yes" : "no"});
    csv::write_file(path, t);
}

namespace {
template <typename Get>
void mean_std(const std::vector<std::array<double, 4>>& rows, Get get,
              std::array<double, 4>& mean, std::array<double, 4>& stddev) {
    double n = static_cast<double>(rows.size());
    for (int t = 0; t < 4; ++t) {
        double m = 0;
        for (const auto& r : rows) m += get(r, t);
        m /= n;
        double v = 0;
        for (const auto& r : rows) v += (get(r, t) - m) * (get(r, t) - m);
        mean[static_cast<size_t>(t)] = m;
        stddev[static_cast<size_t>(t)] = std::sqrt(v / n);
    }
}
} // namespace

AlphaStats alpha_stats(const std::vector<std::array<double, 4>>& alphas) {
    if (alphas.empty()) throw std::domain_error("alpha_stats: no predictions");
    AlphaStats s;
    s.n = static_cast<int>(alphas.size());
    mean_std(alphas, [](const auto& r, int t) { return r[static_cast<size_t>(t)]; }, s.mean,
             s.stddev);
    return s;
}

void write_alpha_csv(const std::string& path, const AlphaStats& stats) {
    csv::Table t;
    t.header = {"target", "mean_alpha", "std_alpha", "n"};
    for (int i = 0; i < 4; ++i)
        t.rows.push_back({kTargetNames[static_cast<size_t>(i)],
                          fmt(stats.mean[static_cast<size_t>(i)], "%.6f"),
                          fmt(stats.stddev[static_cast<size_t>(i)], "%.6f"),
                          std::to_string(stats.n)});
    csv::write_file(path, t);
}

SpreadReport quantile_spread_report(const std::vector<std::array<double, 4>>& spreads) {
    if (spreads.empty()) throw std::domain_error("quantile_spread_report: no predictions");
    SpreadReport rep;
    rep.n = static_cast<int>(spreads.size());
    mean_std(spreads, [](const auto& r, int t) { return r[static_cast<size_t>(t)]; }, rep.mean,
             rep.stddev);
    for (const auto& r : spreads)
        for (int t = 0; t < 4; ++t)
            if (r[static_cast<size_t>(t)] >
                rep.mean[static_cast<size_t>(t)] + 2.0 * rep.stddev[static_cast<size_t>(t)])
                ++rep.flagged[static_cast<size_t>(t)];
    return rep;
}

void write_spread_csv(const std::string& path, const SpreadReport& report) {
    csv::Table t;
    t.header = {"target", "mean_spread", "std_spread", "flagged_for_review", "n"};
    for (int i = 0; i < 4; ++i)
        t.rows.push_back({kTargetNames[static_cast<size_t>(i)],
                          fmt(report.mean[static_cast<size_t>(i)], "%.6f"),
                          fmt(report.stddev[static_cast<size_t>(i)], "%.6f"),
                          std::to_string(report.flagged[static_cast<size_t>(i)]),
                          std::to_string(report.n)});
    csv::write_file(path, t);
}

} // namespace tnet::eval
