#include "tnet/features.hpp"

#include "tnet/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

namespace tnet::feat {

namespace {

constexpr double kTwoPi = 6.283185307179586477;

// time blocks over 1-based hour buckets
struct Block {
    const char* name;
    int first, last; // inclusive bucket range
};
constexpr Block kBlocks[4] = {
    {"night", 1, 6}, {"morning", 7, 11}, {"afternoon", 12, 17}, {"evening", 18, 24}};

std::vector<std::string> make_feature_names() {
    std::vector<std::string> n;
    n.reserve(kFeatureCount);
    // temporal (13)
    const char* dows[7] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
    for (const char* d : dows) n.push_back(std::string("dow_") + d);
    n.push_back("is_weekend");
    n.push_back("start_hour_sin");
    n.push_back("start_hour_cos");
    n.push_back("dow_sin");
    n.push_back("dow_cos");
    n.push_back("start_hour_frac");
    // hourly (48)
    for (int h = 1; h <= 24; ++h) n.push_back("inact_log_h" + std::to_string(h));
    for (int h = 1; h <= 24; ++h) n.push_back("fluct_log_h" + std::to_string(h));
    // time blocks (27)
    for (const auto& b : kBlocks) {
        std::string base = std::string("blk_") + b.name;
        for (const char* kind : {"inact", "fluct"})
            for (const char* stat : {"sum", "mean", "max"})
                n.push_back(base + "_" + kind + "_" + stat);
    }
    n.push_back("share_inact_morning");
    n.push_back("share_inact_evening");
    n.push_back("share_inact_night");
    // peak (14)
    for (const char* kind : {"inact", "fluct"}) {
        n.push_back(std::string("peak_") + kind + "_hour_sin");
        n.push_back(std::string("peak_") + kind + "_hour_cos");
        n.push_back(std::string("peak_") + kind + "_value");
    }
    n.push_back("top1_share_inact");
    n.push_back("top3_share_inact");
    n.push_back("top1_share_fluct");
    n.push_back("top3_share_fluct");
    n.push_back("hours_inact_gt5");
    n.push_back("hours_fluct_ge1");
    n.push_back("morning_peak_inact");
    n.push_back("morning_peak_fluct");
    // rolling/lag (4)
    n.push_back("prev_total_inact_log");
    n.push_back("prev_total_fluct_log");
    n.push_back("roll3_total_inact_log");
    n.push_back("roll3_total_fluct_log");
    // one-hot + trend (17)
    n.push_back("vendor_x");
    n.push_back("vendor_y");
    n.push_back("vendor_z");
    for (char r = 'a'; r <= 'i'; ++r) n.push_back(std::string("region_") + r);
    n.push_back("trend");
    n.push_back("trend_lower");
    n.push_back("trend_upper");
    n.push_back("trend_interval_width");
    n.push_back("trend_slope");
    return n;
}

std::vector<int> make_passthrough() {
    const auto& names = feature_names();
    std::vector<int> cols;
    for (int i = 0; i < kFeatureCount; ++i) {
        const std::string& n = names[static_cast<size_t>(i)];
        bool onehot = n.rfind("dow_", 0) == 0 && n.size() == 7; // the 7 one-hot dow columns
        if (onehot || n == "is_weekend" || n == "morning_peak_inact" || n == "morning_peak_fluct" ||
            n.rfind("vendor_", 0) == 0 || n.rfind("region_", 0) == 0)
            cols.push_back(i);
    }
    return cols;
}

int argmax_hour(const double* values) { // smallest index wins ties
    int best = 0;
    for (int h = 1; h < 24; ++h)
        if (values[h] > values[best]) best = h;
    return best;
}

double topk_share(const double* values, int k) {
    double total = 0;
    for (int h = 0; h < 24; ++h) total += values[h];
    if (total <= 0) return 0.0;
    std::array<double, 24> sorted;
    std::copy(values, values + 24, sorted.begin());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double top = 0;
    for (int i = 0; i < k; ++i) top += sorted[static_cast<size_t>(i)];
    return top / total;
}

} // namespace

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = make_feature_names();
    return names;
}

const std::vector<int>& passthrough_columns() {
    static const std::vector<int> cols = make_passthrough();
    return cols;
}

std::vector<int> context_columns() {
    std::vector<int> cols;
    for (int i = 0; i < kFeatureCount; ++i)
        if (i < kHourlyBegin || i >= kHourlyEnd) cols.push_back(i);
    return cols;
}

std::vector<int> hourly_columns() {
    std::vector<int> cols(kHourlyCount);
    std::iota(cols.begin(), cols.end(), kHourlyBegin);
    return cols;
}

double log_transform(double x) {
    if (x < 0) throw std::domain_error("log_transform: negative input");
    return std::log1p(x);
}

TrendFeatures estimate_trend(const std::map<Date, double>& daily_totals, Date target_date) {
    TrendFeatures tf;
    if (daily_totals.empty()) return tf;
    Date first = daily_totals.begin()->first;
    auto day_index = [&](Date d) {
        return static_cast<double>((d - first).count());
    };
    if (daily_totals.size() == 1) {
        tf.trend = daily_totals.begin()->second;
        tf.lower = tf.upper = tf.trend;
        return tf;
    }
    double n = static_cast<double>(daily_totals.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [d, v] : daily_totals) {
        double x = day_index(d);
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
    }
    double denom = n * sxx - sx * sx;
    double slope = denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
    double intercept = (sy - slope * sx) / n;
    double ss_res = 0;
    for (const auto& [d, v] : daily_totals) {
        double r = v - (intercept + slope * day_index(d));
        ss_res += r * r;
    }
    double resid_sd = std::sqrt(ss_res / n);
    tf.slope = slope;
    tf.trend = intercept + slope * day_index(target_date);
    tf.lower = tf.trend - 1.96 * resid_sd;
    tf.upper = tf.trend + 1.96 * resid_sd;
    tf.width = tf.upper - tf.lower;
    return tf;
}

FeatureArray build_feature_vector(const ingest::CellDay& day, int start_hour,
                                  const std::vector<const ingest::CellDay*>& history,
                                  const TrendFeatures& trend) {
    if (start_hour < 1 || start_hour > 24)
        throw std::domain_error("build_feature_vector: start_hour outside 1..24");
    FeatureArray f{};
    int k = 0;

    // temporal
    int dow = day_of_week(day.date);
    for (int d = 0; d < 7; ++d) f[static_cast<size_t>(k++)] = d == dow ? 1.0 : 0.0;
    f[static_cast<size_t>(k++)] = is_weekend(day.date) ? 1.0 : 0.0;
    f[static_cast<size_t>(k++)] = std::sin(kTwoPi * start_hour / 24.0);
    f[static_cast<size_t>(k++)] = std::cos(kTwoPi * start_hour / 24.0);
    f[static_cast<size_t>(k++)] = std::sin(kTwoPi * dow / 7.0);
    f[static_cast<size_t>(k++)] = std::cos(kTwoPi * dow / 7.0);
    f[static_cast<size_t>(k++)] = start_hour / 24.0;

    // hourly, log-transformed
    std::array<double, 24> fluct_d;
    for (int h = 0; h < 24; ++h) fluct_d[static_cast<size_t>(h)] = day.hourly_fluct[static_cast<size_t>(h)];
    for (int h = 0; h < 24; ++h) f[static_cast<size_t>(k++)] = log_transform(day.hourly_inactive[static_cast<size_t>(h)]);
    for (int h = 0; h < 24; ++h) f[static_cast<size_t>(k++)] = log_transform(fluct_d[static_cast<size_t>(h)]);

    // time blocks
    std::array<double, 4> block_inact_sum{};
    for (int b = 0; b < 4; ++b) {
        const Block& blk = kBlocks[b];
        double width = blk.last - blk.first + 1;
        for (const double* series : {static_cast<const double*>(day.hourly_inactive.data()), static_cast<const double*>(fluct_d.data())}) {
            double sum = 0, mx = 0;
            for (int h = blk.first; h <= blk.last; ++h) {
                sum += series[h - 1];
                mx = std::max(mx, series[h - 1]);
            }
            if (series == day.hourly_inactive.data()) block_inact_sum[static_cast<size_t>(b)] = sum;
            f[static_cast<size_t>(k++)] = log_transform(sum);
            f[static_cast<size_t>(k++)] = log_transform(sum / width);
            f[static_cast<size_t>(k++)] = log_transform(mx);
        }
    }
    double total_inact = day.total_inactive_min;
    f[static_cast<size_t>(k++)] = total_inact > 0 ? block_inact_sum[1] / total_inact : 0.0; // morning
    f[static_cast<size_t>(k++)] = total_inact > 0 ? block_inact_sum[3] / total_inact : 0.0; // evening
    f[static_cast<size_t>(k++)] = total_inact > 0 ? block_inact_sum[0] / total_inact : 0.0; // night

    // peak features; ties resolve to the smallest hour index
    for (const double* series : {static_cast<const double*>(day.hourly_inactive.data()), static_cast<const double*>(fluct_d.data())}) {
        int peak = argmax_hour(series) + 1; // 1-based hour
        f[static_cast<size_t>(k++)] = std::sin(kTwoPi * peak / 24.0);
        f[static_cast<size_t>(k++)] = std::cos(kTwoPi * peak / 24.0);
        f[static_cast<size_t>(k++)] = log_transform(series[peak - 1]);
    }
    f[static_cast<size_t>(k++)] = topk_share(day.hourly_inactive.data(), 1);
    f[static_cast<size_t>(k++)] = topk_share(day.hourly_inactive.data(), 3);
    f[static_cast<size_t>(k++)] = topk_share(fluct_d.data(), 1);
    f[static_cast<size_t>(k++)] = topk_share(fluct_d.data(), 3);
    int gt5 = 0, ge1 = 0;
    for (int h = 0; h < 24; ++h) {
        if (day.hourly_inactive[static_cast<size_t>(h)] > 5.0) ++gt5;
        if (day.hourly_fluct[static_cast<size_t>(h)] >= 1) ++ge1;
    }
    f[static_cast<size_t>(k++)] = gt5;
    f[static_cast<size_t>(k++)] = ge1;
    int peak_inact = argmax_hour(day.hourly_inactive.data()) + 1;
    int peak_fluct = argmax_hour(fluct_d.data()) + 1;
    f[static_cast<size_t>(k++)] = (peak_inact >= 7 && peak_inact <= 11) ? 1.0 : 0.0;
    f[static_cast<size_t>(k++)] = (peak_fluct >= 7 && peak_fluct <= 11) ? 1.0 : 0.0;

    // rolling/lag from calendar dates d-1..d-3; zeros without history
    const ingest::CellDay* prev1 = nullptr;
    double roll_inact = 0, roll_fluct = 0;
    int roll_n = 0;
    for (const auto* h : history) {
        auto gap = (day.date - h->date).count();
        if (gap == 1) prev1 = h;
        if (gap >= 1 && gap <= 3) {
            roll_inact += h->total_inactive_min;
            roll_fluct += h->total_fluct;
            ++roll_n;
        }
    }
    f[static_cast<size_t>(k++)] = prev1 ? log_transform(prev1->total_inactive_min) : 0.0;
    f[static_cast<size_t>(k++)] = prev1 ? log_transform(prev1->total_fluct) : 0.0;
    f[static_cast<size_t>(k++)] = roll_n ? log_transform(roll_inact / roll_n) : 0.0;
    f[static_cast<size_t>(k++)] = roll_n ? log_transform(roll_fluct / roll_n) : 0.0;

    // one-hot + trend
    for (int v = 0; v < kNumVendors; ++v)
        f[static_cast<size_t>(k++)] = static_cast<int>(day.vendor) == v ? 1.0 : 0.0;
    for (int r = 0; r < kNumRegions; ++r)
        f[static_cast<size_t>(k++)] = static_cast<int>(day.region) == r ? 1.0 : 0.0;
    f[static_cast<size_t>(k++)] = trend.trend;
    f[static_cast<size_t>(k++)] = trend.lower;
    f[static_cast<size_t>(k++)] = trend.upper;
    f[static_cast<size_t>(k++)] = trend.width;
    f[static_cast<size_t>(k++)] = trend.slope;

    if (k != kFeatureCount) throw std::logic_error("feature catalogue drifted from 123");
    return f;
}

std::vector<FeatureArray> expand_start_hours(const ingest::CellDay& day,
                                             const std::vector<const ingest::CellDay*>& history,
                                             const TrendFeatures& trend) {
    std::vector<FeatureArray> out;
    out.reserve(24);
    for (int s = 1; s <= 24; ++s) out.push_back(build_feature_vector(day, s, history, trend));
    return out;
}

void Scaler::fit(const std::vector<FeatureArray>& train_rows) {
    if (train_rows.empty()) throw std::invalid_argument("Scaler::fit: no training rows");
    std::array<bool, kFeatureCount> skip{};
    for (int c : passthrough_columns()) skip[static_cast<size_t>(c)] = true;
    double n = static_cast<double>(train_rows.size());
    for (int c = 0; c < kFeatureCount; ++c) {
        if (skip[static_cast<size_t>(c)]) {
            mean_[static_cast<size_t>(c)] = 0.0;
            std_[static_cast<size_t>(c)] = 1.0;
            continue;
        }
        double m = 0;
        for (const auto& r : train_rows) m += r[static_cast<size_t>(c)];
        m /= n;
        double var = 0;
        for (const auto& r : train_rows) {
            double d = r[static_cast<size_t>(c)] - m;
            var += d * d;
        }
        mean_[static_cast<size_t>(c)] = m;
        std_[static_cast<size_t>(c)] = std::max(std::sqrt(var / n), 1e-8);
    }
    fitted_ = true;
}

void Scaler::apply(FeatureArray& row) const {
    if (!fitted_) throw std::logic_error("Scaler::apply before fit");
    for (int c = 0; c < kFeatureCount; ++c)
        row[static_cast<size_t>(c)] =
            (row[static_cast<size_t>(c)] - mean_[static_cast<size_t>(c)]) / std_[static_cast<size_t>(c)];
}

void Scaler::set(const std::array<double, kFeatureCount>& means,
                 const std::array<double, kFeatureCount>& stds) {
    mean_ = means;
    std_ = stds;
    fitted_ = true;
}

void split_by_date(const std::vector<Date>& all_dates, int n_test_dates,
                   std::vector<Date>& train_dates, std::vector<Date>& test_dates) {
    std::set<Date> distinct(all_dates.begin(), all_dates.end());
    if (static_cast<int>(distinct.size()) < n_test_dates + 1)
        throw std::invalid_argument("split_by_date: need at least n_test_dates + 1 distinct dates");
    std::vector<Date> sorted(distinct.begin(), distinct.end());
    size_t cut = sorted.size() - static_cast<size_t>(n_test_dates);
    train_dates.assign(sorted.begin(), sorted.begin() + static_cast<long>(cut));
    test_dates.assign(sorted.begin() + static_cast<long>(cut), sorted.end());
}

std::vector<size_t> Dataset::train_indices() const {
    std::set<Date> train(train_dates.begin(), train_dates.end());
    std::vector<size_t> idx;
    for (size_t i = 0; i < samples.size(); ++i)
        if (train.count(samples[i].key.date)) idx.push_back(i);
    return idx;
}

std::vector<size_t> Dataset::test_indices() const {
    std::set<Date> test(test_dates.begin(), test_dates.end());
    std::vector<size_t> idx;
    for (size_t i = 0; i < samples.size(); ++i)
        if (test.count(samples[i].key.date)) idx.push_back(i);
    return idx;
}

Dataset build_dataset(const std::vector<ingest::CellDay>& cell_days, int n_test_dates) {
    Dataset ds;
    std::vector<Date> dates;
    dates.reserve(cell_days.size());
    for (const auto& cd : cell_days) dates.push_back(cd.date);
    split_by_date(dates, n_test_dates, ds.train_dates, ds.test_dates);
    std::set<Date> train_set(ds.train_dates.begin(), ds.train_dates.end());

    // network-level daily mean of total inactive minutes, train dates only
    std::map<Date, double> sums;
    std::map<Date, int> counts;
    for (const auto& cd : cell_days) {
        if (!train_set.count(cd.date)) continue;
        sums[cd.date] += cd.total_inactive_min;
        counts[cd.date] += 1;
    }
    for (auto& [d, s] : sums) ds.trend_daily_totals[d] = s / counts[d];

    // per-cell history index for lag features
    std::map<std::string, std::vector<const ingest::CellDay*>> by_cell;
    for (const auto& cd : cell_days) by_cell[cd.cell_id].push_back(&cd);

    std::map<Date, TrendFeatures> trend_by_date;
    std::vector<const ingest::CellDay*> ordered;
    for (const auto& cd : cell_days) ordered.push_back(&cd);
    std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
        if (a->date != b->date) return a->date < b->date;
        return a->cell_id < b->cell_id;
    });

    for (const auto* cd : ordered) {
        auto it = trend_by_date.find(cd->date);
        if (it == trend_by_date.end())
            it = trend_by_date.emplace(cd->date, estimate_trend(ds.trend_daily_totals, cd->date))
                     .first;
        std::vector<const ingest::CellDay*> history;
        for (const auto* h : by_cell[cd->cell_id])
            if (h->date < cd->date) history.push_back(h);
        auto vectors = expand_start_hours(*cd, history, it->second);
        for (int s = 1; s <= 24; ++s) {
            Sample smp;
            smp.key = {cd->cell_id, cd->date, s};
            smp.x = vectors[static_cast<size_t>(s - 1)];
            smp.y = labels::derive_labels(cd->hourly_inactive, cd->hourly_fluct, s);
            ds.samples.push_back(std::move(smp));
        }
    }

    std::vector<FeatureArray> train_rows;
    for (const auto& smp : ds.samples)
        if (train_set.count(smp.key.date)) train_rows.push_back(smp.x);
    ds.scaler.fit(train_rows);
    for (auto& smp : ds.samples) ds.scaler.apply(smp.x);
    return ds;
}

namespace {

void write_matrix_csv(const std::string& path, const Dataset& ds, bool with_labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    std::string header;
    for (const auto& n : feature_names()) {
        header += n;
        header += ',';
    }
    header += with_labels ? "cell_id,date,start_hour,t1,t2,t3,t4" : "cell_id,date,start_hour";
    out << header << '\n';
    char buf[64];
    for (const auto& smp : ds.samples) {
        std::string line;
        line.reserve(kFeatureCount * 12 + 64);
        for (double v : smp.x) {
            std::snprintf(buf, sizeof(buf), "%.10g", v);
            line += buf;
            line += ',';
        }
        line += smp.key.cell_id;
        line += ',';
        line += format_date(smp.key.date);
        line += ',';
        line += std::to_string(smp.key.start_hour);
        if (with_labels) {
            std::snprintf(buf, sizeof(buf), ",%d,%.10g,%.10g,%.10g", smp.y.t1_hours,
                          smp.y.t2_inactive_min, smp.y.t3_fluct, smp.y.t4_hour_fluct);
            line += buf;
        }
        out << line << '\n';
    }
}

Dataset read_matrix_csv(const std::string& path, int n_test_dates, bool with_labels) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
    std::string expected;
    for (const auto& n : feature_names()) {
        expected += n;
        expected += ',';
    }
    expected += with_labels ? "cell_id,date,start_hour,t1,t2,t3,t4" : "cell_id,date,start_hour";
    if (line != expected)
        throw std::runtime_error("dataset header does not match the frozen feature contract");

    size_t expected_fields = static_cast<size_t>(kFeatureCount) + (with_labels ? 7 : 3);
    Dataset ds;
    std::vector<Date> dates;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = csv::split_line(line);
        if (fields.size() != expected_fields)
            throw std::runtime_error("malformed dataset row in " + path);
        Sample smp;
        for (int c = 0; c < kFeatureCount; ++c)
            smp.x[static_cast<size_t>(c)] = std::stod(fields[static_cast<size_t>(c)]);
        smp.key.cell_id = fields[kFeatureCount];
        auto d = parse_date(fields[kFeatureCount + 1]);
        if (!d) throw std::runtime_error("malformed date in " + path);
        smp.key.date = *d;
        smp.key.start_hour = std::stoi(fields[kFeatureCount + 2]);
        if (with_labels) {
            smp.y.t1_hours = std::stoi(fields[kFeatureCount + 3]);
            smp.y.t2_inactive_min = std::stod(fields[kFeatureCount + 4]);
            smp.y.t3_fluct = std::stod(fields[kFeatureCount + 5]);
            smp.y.t4_hour_fluct = std::stod(fields[kFeatureCount + 6]);
        }
        dates.push_back(smp.key.date);
        ds.samples.push_back(std::move(smp));
    }
    split_by_date(dates, n_test_dates, ds.train_dates, ds.test_dates);
    return ds;
}

} // namespace

void write_dataset_csv(const std::string& path, const Dataset& ds) {
    write_matrix_csv(path, ds, true);
}

void write_features_csv(const std::string& path, const Dataset& ds) {
    write_matrix_csv(path, ds, false);
}

Dataset read_features_csv(const std::string& path, int n_test_dates) {
    return read_matrix_csv(path, n_test_dates, false);
}

Dataset read_dataset_csv(const std::string& path, int n_test_dates) {
    return read_matrix_csv(path, n_test_dates, true);
}

void write_manifest(const std::string& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "feature_count " << kFeatureCount << "\n";
    out << "samples " << ds.samples.size() << "\n";
    auto join_dates = [](const std::vector<Date>& v) {
        std::string s;
        for (size_t i = 0; i < v.size(); ++i) {
            if (i) s += ',';
            s += format_date(v[i]);
        }
        return s;
    };
    out << "train_dates " << join_dates(ds.train_dates) << "\n";
    out << "test_dates " << join_dates(ds.test_dates) << "\n";
    out << "scaler_fit_dates " << join_dates(ds.train_dates) << "\n";
    std::string trend_dates;
    for (const auto& [d, _] : ds.trend_daily_totals) {
        if (!trend_dates.empty()) trend_dates += ',';
        trend_dates += format_date(d);
    }
    out << "trend_fit_dates " << trend_dates << "\n";
    char buf[48];
    out << "trend_daily_means";
    for (const auto& [_, v] : ds.trend_daily_totals) {
        std::snprintf(buf, sizeof(buf), " %.17g", v);
        out << buf;
    }
    out << "\nscaler_means";
    for (double m : ds.scaler.means()) {
        std::snprintf(buf, sizeof(buf), " %.17g", m);
        out << buf;
    }
    out << "\nscaler_stds";
    for (double s : ds.scaler.stds()) {
        std::snprintf(buf, sizeof(buf), " %.17g", s);
        out << buf;
    }
    out << "\n";
}

} // namespace tnet::feat
