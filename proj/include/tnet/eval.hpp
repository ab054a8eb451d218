#pragma once

#include <array>
#include <string>
#include <vector>

namespace tnet::eval {

inline constexpr std::array<const char*, 4> kTargetNames = {
    "threshold_hours", "threshold_inactive_min", "threshold_fluctuation",
    "each_hour_fluctuation"};

struct Metrics {
    double mae = 0;
    double rmse = 0;
    double r2 = 0;
    bool r2_defined = true;
};

// R^2 uses SST about the evaluation-set mean. A zero-variance target gives
// R^2 = 0 on a perfect fit and "undefined" otherwise.
Metrics metrics(const std::vector<double>& y, const std::vector<double>& yhat);

struct WilcoxonResult {
    double statistic = 0; // W+: sum of positive midranks
    double p_value = 1;
    int n_used = 0;   // pairs after dropping zero differences
    bool exact = false;
    bool degenerate = false; // every difference was zero
};

// Two-sided signed-rank test; zero differences dropped, ties midranked.
// Exact null by sign enumeration for n <= 12, otherwise a normal
// approximation with continuity and tie corrections.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& errors_a,
                                    const std::vector<double>& errors_b);

double per_sample_error(const std::array<double, 4>& pred, const std::array<double, 4>& label);

struct KsResult {
    double statistic = 0;
    double p_value = 1;
};

// D = sup |F_x - F_y| over pooled empirical CDFs; p from the asymptotic
// Kolmogorov distribution at sqrt(n1*n2/(n1+n2)) * D.
KsResult ks_two_sample(std::vector<double> x, std::vector<double> y);

struct ModelMetrics {
    std::string model;
    std::array<Metrics, 4> per_target;
    Metrics average; // averaged across the four targets
};

ModelMetrics evaluate_model(const std::string& name,
                            const std::array<std::vector<double>, 4>& y,
                            const std::array<std::vector<double>, 4>& yhat);

// Predicts the per-target training-set mean for every test sample.
ModelMetrics naive_baseline(const std::array<std::vector<double>, 4>& train_labels,
                            const std::array<std::vector<double>, 4>& test_labels);

void write_metrics_csv(const std::string& path, const std::vector<ModelMetrics>& models);
// Aligned comparison table, one best-value marker per row (ties all marked).
void write_metrics_text(const std::string& path, const std::vector<ModelMetrics>& models);

struct WilcoxonRow {
    std::string model_a;
    std::string model_b;
    WilcoxonResult result;
};
void write_wilcoxon_csv(const std::string& path, const std::vector<WilcoxonRow>& rows);

struct AlphaStats {
    std::array<double, 4> mean{};
    std::array<double, 4> stddev{};
    int n = 0;
};
AlphaStats alpha_stats(const std::vector<std::array<double, 4>>& alphas);
void write_alpha_csv(const std::string& path, const AlphaStats& stats);

struct SpreadReport {
    std::array<double, 4> mean{};
    std::array<double, 4> stddev{};
    std::array<int, 4> flagged{}; // spread > mean + 2*std, per target
    int n = 0;
};
SpreadReport quantile_spread_report(const std::vector<std::array<double, 4>>& spreads);
void write_spread_csv(const std::string& path, const SpreadReport& report);

} // namespace tnet::eval
