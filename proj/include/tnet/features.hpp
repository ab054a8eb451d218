#pragma once

#include "tnet/ingest.hpp"
#include "tnet/labels.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace tnet::feat {

// Frozen 123-feature contract. Order and category sizes are pinned by a
// golden-file test; the PCTN context/hourly split is defined by slices into
// this layout.
inline constexpr int kFeatureCount = 123;
inline constexpr int kTemporalCount = 13;
inline constexpr int kHourlyCount = 48;
inline constexpr int kBlockCount = 27;
inline constexpr int kPeakCount = 14;
inline constexpr int kLagCount = 4;
inline constexpr int kOneHotTrendCount = 17;

inline constexpr int kHourlyBegin = kTemporalCount;            // 13
inline constexpr int kHourlyEnd = kHourlyBegin + kHourlyCount; // 61
inline constexpr int kContextCount = kFeatureCount - kHourlyCount; // 75

const std::vector<std::string>& feature_names();
const std::vector<int>& passthrough_columns(); // one-hot / flag columns left unscaled

// Context slice = everything outside [kHourlyBegin, kHourlyEnd).
std::vector<int> context_columns();
std::vector<int> hourly_columns();

struct TrendFeatures {
    double trend = 0;
    double lower = 0;
    double upper = 0;
    double width = 0;
    double slope = 0; // per day
};

// OLS line over (day index, total) evaluated at target_date, with a
// +/-1.96 * residual-sd interval. Fewer than two dates degrades to a flat
// zero-width trend.
TrendFeatures estimate_trend(const std::map<Date, double>& daily_totals, Date target_date);

double log_transform(double x); // ln(1+x); negative input is a domain error

using FeatureArray = std::array<double, kFeatureCount>;

// history: this cell's prior CellDays, any order; lag features use calendar
// dates d-1..d-3 and fall back to zero when absent.
FeatureArray build_feature_vector(const ingest::CellDay& day, int start_hour,
                                  const std::vector<const ingest::CellDay*>& history,
                                  const TrendFeatures& trend);

std::vector<FeatureArray> expand_start_hours(const ingest::CellDay& day,
                                             const std::vector<const ingest::CellDay*>& history,
                                             const TrendFeatures& trend);

class Scaler {
public:
    // Population mean/std per non-passthrough column; std clamped at 1e-8.
    void fit(const std::vector<FeatureArray>& train_rows);
    void apply(FeatureArray& row) const;
    bool fitted() const { return fitted_; }
    const std::array<double, kFeatureCount>& means() const { return mean_; }
    const std::array<double, kFeatureCount>& stds() const { return std_; }
    void set(const std::array<double, kFeatureCount>& means,
             const std::array<double, kFeatureCount>& stds);

private:
    std::array<double, kFeatureCount> mean_{};
    std::array<double, kFeatureCount> std_{};
    bool fitted_ = false;
};

struct SampleKey {
    std::string cell_id;
    Date date{};
    int start_hour = 1;
};

struct Sample {
    SampleKey key;
    FeatureArray x{};
    labels::ThresholdLabels y;
};

struct Dataset {
    std::vector<Sample> samples; // ordered by (date, cell_id, start_hour)
    std::vector<Date> train_dates;
    std::vector<Date> test_dates;
    Scaler scaler;
    std::map<Date, double> trend_daily_totals; // train dates only
    std::vector<size_t> train_indices() const;
    std::vector<size_t> test_indices() const;
};

// Expands every cell-day across 24 start hours, derives labels, fits the
// scaler and trend on train dates only, and standardizes all samples.
Dataset build_dataset(const std::vector<ingest::CellDay>& cell_days, int n_test_dates);

// Latest n distinct dates become the test side. Throws when fewer than
// n_test_dates + 1 distinct dates exist.
void split_by_date(const std::vector<Date>& all_dates, int n_test_dates,
                   std::vector<Date>& train_dates, std::vector<Date>& test_dates);

void write_dataset_csv(const std::string& path, const Dataset& ds);
Dataset read_dataset_csv(const std::string& path, int n_test_dates);
void write_manifest(const std::string& path, const Dataset& ds);

// Label-free variant used between the features and label stages.
void write_features_csv(const std::string& path, const Dataset& ds);
Dataset read_features_csv(const std::string& path, int n_test_dates);

} // namespace tnet::feat
