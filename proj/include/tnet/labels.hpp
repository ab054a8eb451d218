#pragma once

#include "tnet/ingest.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace tnet::labels {

struct ThresholdLabels {
    int t1_hours = 2;          // audit window length, clipped to [2,8]
    double t2_inactive_min = 5; // >= 5 after the sensitivity factor
    double t3_fluct = 1;        // >= 1
    double t4_hour_fluct = 1;   // >= 1

    double target(int i) const; // i in 0..3
};

// Linear interpolation between order statistics at index q*(n-1).
double percentile_linear(std::vector<double> values, double q);

// Window start clock 18:00-23:00 (buckets 19..24) -> 0.5; 07:00-11:00
// (buckets 8..12) -> 1.0; everything else -> 1.25.
double sensitivity_factor(int start_hour);

// Derives the four targets over the 8-hour window starting at start_hour,
// wrapping modulo 24. Percentiles use percentile_linear above.
ThresholdLabels derive_labels(const std::array<double, 24>& hourly_inactive,
                              const std::array<int, 24>& hourly_fluct, int start_hour);

struct KsCheckResult {
    double statistic = 0;
    double p_value = 1;
    int n_holdout_cells = 0;
    int n_rest_cells = 0;
};

// Circularity check: splits cells (not samples) into holdout/rest by seeded
// hash and compares the holdout cells' label distribution derived under the
// full-population rule against the rest-only rule. The percentile rule is
// purely local per cell-day, so the distributions must be indistinguishable.
std::array<KsCheckResult, 4> ks_holdout_check(const std::vector<ingest::CellDay>& cell_days,
                                              double holdout_fraction, std::uint64_t seed);

} // namespace tnet::labels
