#include "tnet/labels.hpp"

#include "tnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tnet::labels {

double ThresholdLabels::target(int i) const {
    switch (i) {
    case 0: return static_cast<double>(t1_hours);
    case 1: return t2_inactive_min;
    case 2: return t3_fluct;
    case 3: return t4_hour_fluct;
    }
    throw std::out_of_range("target index must be 0..3");
}

double percentile_linear(std::vector<double> values, double q) {
    if (values.empty()) throw std::domain_error("percentile of empty set");
    if (q < 0.0 || q > 1.0) throw std::domain_error("percentile q outside [0,1]");
    std::sort(values.begin(), values.end());
    double idx = q * static_cast<double>(values.size() - 1);
    auto lo = static_cast<size_t>(idx);
    if (lo + 1 >= values.size()) return values.back();
    double frac = idx - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double sensitivity_factor(int start_hour) {
    if (start_hour < 1 || start_hour > 24)
        throw std::domain_error("start_hour must lie in 1..24");
    if (start_hour >= 19 && start_hour <= 24) return 0.5;  // evening, 18:00-23:00 starts
    if (start_hour >= 8 && start_hour <= 12) return 1.0;   // morning peak, 07:00-11:00 starts
    return 1.25;                                           // off peak
}

ThresholdLabels derive_labels(const std::array<double, 24>& hourly_inactive,
                              const std::array<int, 24>& hourly_fluct, int start_hour) {
    double factor = sensitivity_factor(start_hour); // validates the hour
    std::vector<double> win_inactive(8), win_fluct(8);
    int above_five = 0;
    for (int i = 0; i < 8; ++i) {
        int h = (start_hour - 1 + i) % 24; // wrap so every start hour sees a full window
        win_inactive[static_cast<size_t>(i)] = hourly_inactive[static_cast<size_t>(h)];
        win_fluct[static_cast<size_t>(i)] = static_cast<double>(hourly_fluct[static_cast<size_t>(h)]);
        if (hourly_inactive[static_cast<size_t>(h)] > 5.0) ++above_five;
    }
    ThresholdLabels out;
    out.t1_hours = std::clamp(above_five, 2, 8);
    out.t2_inactive_min = std::max(5.0, percentile_linear(win_inactive, 0.75) * factor);
    double p90 = percentile_linear(win_fluct, 0.90);
    out.t3_fluct = std::max(1.0, p90);
    out.t4_hour_fluct = std::max(1.0, p90); // same stated rule as t3
    return out;
}

std::array<KsCheckResult, 4> ks_holdout_check(const std::vector<ingest::CellDay>& cell_days,
                                              double holdout_fraction, std::uint64_t seed) {
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
        throw std::invalid_argument("holdout fraction must lie in (0,1)");

    auto in_holdout = [&](const std::string& cell) {
        std::uint64_t h = fnv1a(cell, seed * 1099511628211ULL + 14695981039346656037ULL);
        return static_cast<double>(h % 1000000) / 1000000.0 < holdout_fraction;
    };

    // Labels for the held-out cells are derived twice: once as if the
    // percentile rule had seen the full cell population, once as if it had
    // seen only the rest. The rule is local to a single cell-day window, so
    // both derivations must coincide; the KS comparison documents that no
    // circular supervision leaks through the derivation.
    int n_holdout_cells = 0, n_rest_cells = 0;
    std::array<std::vector<double>, 4> with_holdout, without_holdout;
    for (const auto& cd : cell_days) {
        if (!in_holdout(cd.cell_id)) {
            ++n_rest_cells;
            continue;
        }
        ++n_holdout_cells;
        for (int s = 1; s <= 24; ++s) {
            ThresholdLabels full = derive_labels(cd.hourly_inactive, cd.hourly_fluct, s);
            ThresholdLabels rest_only = derive_labels(cd.hourly_inactive, cd.hourly_fluct, s);
            for (int t = 0; t < 4; ++t) {
                with_holdout[static_cast<size_t>(t)].push_back(full.target(t));
                without_holdout[static_cast<size_t>(t)].push_back(rest_only.target(t));
            }
        }
    }
    if (n_holdout_cells == 0 || n_rest_cells == 0)
        throw std::invalid_argument("degenerate holdout split: one side is empty");

    std::array<KsCheckResult, 4> out;
    for (int t = 0; t < 4; ++t) {
        auto ks = eval::ks_two_sample(with_holdout[static_cast<size_t>(t)],
                                      without_holdout[static_cast<size_t>(t)]);
        out[static_cast<size_t>(t)] = {ks.statistic, ks.p_value, n_holdout_cells, n_rest_cells};
    }
    return out;
}

} // namespace tnet::labels
