#include <doctest.h>

#include "tnet/features.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace tnet;
using namespace tnet::feat;

namespace {

ingest::CellDay blank_day(const std::string& cell, Date date) {
    ingest::CellDay cd;
    cd.cell_id = cell;
    cd.date = date;
    cd.vendor = Vendor::Y;
    cd.region = Region::C;
    return cd;
}

void refresh_totals(ingest::CellDay& cd) {
    cd.total_inactive_min = 0;
    cd.total_fluct = 0;
    for (int h = 0; h < 24; ++h) {
        cd.total_inactive_min += cd.hourly_inactive[static_cast<size_t>(h)];
        cd.total_fluct += cd.hourly_fluct[static_cast<size_t>(h)];
    }
}

} // namespace

TEST_CASE("feature name golden file pins the 123-column contract") {
    std::ifstream golden(std::string(TNET_TEST_GOLDEN_DIR) + "/feature_names.txt");
    REQUIRE(golden.good());
    std::vector<std::string> expected;
    std::string line;
    while (std::getline(golden, line))
        if (!line.empty()) expected.push_back(line);
    REQUIRE(expected.size() == 123);
    const auto& names = feature_names();
    REQUIRE(names.size() == 123);
    for (size_t i = 0; i < names.size(); ++i) CHECK(names[i] == expected[i]);
}

TEST_CASE("category cardinalities are 13/48/27/14/4/17") {
    CHECK(kTemporalCount == 13);
    CHECK(kHourlyCount == 48);
    CHECK(kBlockCount == 27);
    CHECK(kPeakCount == 14);
    CHECK(kLagCount == 4);
    CHECK(kOneHotTrendCount == 17);
    CHECK(kTemporalCount + kHourlyCount + kBlockCount + kPeakCount + kLagCount +
              kOneHotTrendCount ==
          123);
    // context/hourly slices partition the vector
    auto ctx = context_columns();
    auto hourly = hourly_columns();
    CHECK(ctx.size() == 75);
    CHECK(hourly.size() == 48);
    std::set<int> all(ctx.begin(), ctx.end());
    all.insert(hourly.begin(), hourly.end());
    CHECK(all.size() == 123);
}

TEST_CASE("log transform") {
    CHECK(log_transform(0.0) == 0.0);
    CHECK(log_transform(std::exp(1.0) - 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(log_transform(236.8) == doctest::Approx(std::log(237.8)).epsilon(1e-12));
    CHECK_THROWS_AS(log_transform(-0.1), std::domain_error);
}

TEST_CASE("trend estimation") {
    Date d1 = *parse_date("2024-01-01");
    auto day = [&](int k) { return d1 + std::chrono::days{k}; };
    SUBCASE("collinear points extrapolate exactly") {
        std::map<Date, double> totals = {{day(0), 10}, {day(1), 20}, {day(2), 30}};
        auto t = estimate_trend(totals, day(3));
        CHECK(t.trend == doctest::Approx(40.0).epsilon(1e-12));
        CHECK(t.slope == doctest::Approx(10.0).epsilon(1e-12));
        CHECK(t.width == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(t.lower <= t.trend);
        CHECK(t.upper >= t.trend);
    }
    SUBCASE("constant series is flat") {
        std::map<Date, double> totals;
        for (int k = 0; k < 7; ++k) totals[day(k)] = 5.0;
        auto t = estimate_trend(totals, day(10));
        CHECK(t.trend == doctest::Approx(5.0));
        CHECK(t.slope == doctest::Approx(0.0));
    }
    SUBCASE("single date falls back to a flat zero-width trend") {
        auto t = estimate_trend({{day(0), 7.0}}, day(5));
        CHECK(t.trend == 7.0);
        CHECK(t.slope == 0.0);
        CHECK(t.width == 0.0);
    }
    SUBCASE("noisy fit carries a positive interval") {
        std::map<Date, double> totals = {{day(0), 10}, {day(1), 30}, {day(2), 15}, {day(3), 40}};
        auto t = estimate_trend(totals, day(4));
        CHECK(t.width > 0.0);
        CHECK(t.upper - t.lower == doctest::Approx(t.width));
    }
}

TEST_CASE("feature vector contents") {
    Date sat = *parse_date("2024-01-06");
    TrendFeatures tf;

    SUBCASE("all-zero day: block, peak and lag features zero; weekend flag set") {
        auto cd = blank_day("c", sat);
        auto f = build_feature_vector(cd, 5, {}, tf);
        const auto& names = feature_names();
        CHECK(f[7] == 1.0); // is_weekend
        CHECK(f[5] == 1.0); // dow_sat
        for (int i = 0; i < kFeatureCount; ++i) {
            const std::string& n = names[static_cast<size_t>(i)];
            if (n.rfind("blk_", 0) == 0 || n.rfind("share_", 0) == 0 ||
                n.rfind("top", 0) == 0 || n.rfind("prev_", 0) == 0 || n.rfind("roll3_", 0) == 0 ||
                n == "peak_inact_value" || n == "peak_fluct_value" || n == "hours_inact_gt5" ||
                n == "hours_fluct_ge1")
                CHECK(f[static_cast<size_t>(i)] == 0.0);
        }
    }
    SUBCASE("single spike at hour 9 drives the peak encodings") {
        auto cd = blank_day("c", sat);
        cd.hourly_inactive[8] = 42.0; // hour 9
        refresh_totals(cd);
        auto f = build_feature_vector(cd, 1, {}, tf);
        const auto& names = feature_names();
        auto at = [&](const std::string& n) {
            for (size_t i = 0; i < names.size(); ++i)
                if (names[i] == n) return f[i];
            FAIL("missing feature ", n);
            return 0.0;
        };
        CHECK(at("peak_inact_hour_sin") == doctest::Approx(std::sin(2 * M_PI * 9 / 24.0)));
        CHECK(at("peak_inact_hour_cos") == doctest::Approx(std::cos(2 * M_PI * 9 / 24.0)));
        CHECK(at("top1_share_inact") == doctest::Approx(1.0));
        CHECK(at("top3_share_inact") == doctest::Approx(1.0));
        CHECK(at("morning_peak_inact") == 1.0);
        CHECK(at("hours_inact_gt5") == 1.0);
        CHECK(at("inact_log_h9") == doctest::Approx(std::log1p(42.0)));
    }
    SUBCASE("lag features read calendar history") {
        auto today = blank_day("c", sat);
        auto yesterday = blank_day("c", sat - std::chrono::days{1});
        yesterday.hourly_inactive[0] = 30;
        yesterday.hourly_fluct[0] = 2;
        refresh_totals(yesterday);
        auto old = blank_day("c", sat - std::chrono::days{3});
        old.hourly_inactive[0] = 60;
        refresh_totals(old);
        auto f = build_feature_vector(today, 1, {&yesterday, &old}, tf);
        CHECK(f[102] == doctest::Approx(std::log1p(30.0)));  // prev_total_inact_log
        CHECK(f[103] == doctest::Approx(std::log1p(2.0)));   // prev_total_fluct_log
        CHECK(f[104] == doctest::Approx(std::log1p(45.0)));  // mean of 30 and 60
    }
    SUBCASE("deterministic rebuild") {
        auto cd = blank_day("c", sat);
        cd.hourly_inactive[3] = 17.25;
        cd.hourly_fluct[3] = 1;
        refresh_totals(cd);
        auto a = build_feature_vector(cd, 7, {}, tf);
        auto b = build_feature_vector(cd, 7, {}, tf);
        CHECK(a == b);
    }
    SUBCASE("start hour outside 1..24 throws") {
        auto cd = blank_day("c", sat);
        CHECK_THROWS_AS(build_feature_vector(cd, 0, {}, tf), std::domain_error);
        CHECK_THROWS_AS(build_feature_vector(cd, 25, {}, tf), std::domain_error);
    }
}

TEST_CASE("expansion produces 24 vectors differing only in start-hour features") {
    auto cd = blank_day("c", *parse_date("2024-01-08"));
    cd.hourly_inactive[10] = 12;
    refresh_totals(cd);
    auto vecs = expand_start_hours(cd, {}, {});
    REQUIRE(vecs.size() == 24);
    std::set<int> hour_cols = {8, 9, 12}; // start_hour_sin/cos, start_hour_frac
    for (int s = 1; s < 24; ++s)
        for (int c = 0; c < kFeatureCount; ++c)
            if (!hour_cols.count(c))
                CHECK(vecs[static_cast<size_t>(s)][static_cast<size_t>(c)] ==
                      vecs[0][static_cast<size_t>(c)]);
    CHECK(vecs[0][12] == doctest::Approx(1.0 / 24.0));
    CHECK(vecs[23][12] == doctest::Approx(1.0));
}

TEST_CASE("scaler standardizes and passes one-hot columns through") {
    std::vector<FeatureArray> rows(3);
    for (auto& r : rows) r.fill(0.0);
    // column 13 (first hourly feature) carries 1,2,3
    rows[0][13] = 1;
    rows[1][13] = 2;
    rows[2][13] = 3;
    // column 106 (vendor_x one-hot) carries 0,1,0
    rows[1][106] = 1;
    // column 14 constant at 5
    for (auto& r : rows) r[14] = 5;

    Scaler s;
    CHECK_THROWS_AS(s.apply(rows[0]), std::logic_error);
    s.fit(rows);
    auto a = rows[0], b = rows[1], c = rows[2];
    s.apply(a);
    s.apply(b);
    s.apply(c);
    CHECK(a[13] == doctest::Approx(-1.2247448714).epsilon(1e-9));
    CHECK(b[13] == doctest::Approx(0.0));
    CHECK(c[13] == doctest::Approx(1.2247448714).epsilon(1e-9));
    CHECK(a[106] == 0.0);
    CHECK(b[106] == 1.0);
    CHECK(a[14] == 0.0); // constant column clamps to zero
    CHECK(b[14] == 0.0);

    // scaling then unscaling is the identity on non-constant columns
    double restored = a[13] * s.stds()[13] + s.means()[13];
    CHECK(restored == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("split_by_date takes the latest dates as test") {
    Date d0 = *parse_date("2024-01-01");
    std::vector<Date> dates;
    for (int k = 9; k >= 0; --k) dates.push_back(d0 + std::chrono::days{k}); // shuffled order
    std::vector<Date> train, test;
    split_by_date(dates, 3, train, test);
    CHECK(train.size() == 7);
    CHECK(test.size() == 3);
    CHECK(train.back() < test.front());
    for (Date t : train)
        for (Date e : test) CHECK(t < e);

    split_by_date(dates, 0, train, test);
    CHECK(train.size() == 10);
    CHECK(test.empty());

    CHECK_THROWS_AS(split_by_date({d0}, 3, train, test), std::invalid_argument);
}

TEST_CASE("dataset build: expansion, leakage guard, CSV round-trip") {
    std::vector<ingest::CellDay> days;
    Date d0 = *parse_date("2024-01-01");
    for (int k = 0; k < 5; ++k)
        for (int c = 0; c < 3; ++c) {
            auto cd = blank_day("cell" + std::to_string(c), d0 + std::chrono::days{k});
            cd.hourly_inactive[static_cast<size_t>((c * 5 + k) % 24)] = 10.0 + c + k;
            cd.hourly_fluct[static_cast<size_t>((c + k) % 24)] = c;
            refresh_totals(cd);
            days.push_back(cd);
        }
    auto ds = build_dataset(days, 2);
    CHECK(ds.samples.size() == days.size() * 24);
    CHECK(ds.train_dates.size() == 3);
    CHECK(ds.test_dates.size() == 2);
    for (const auto& [date, _] : ds.trend_daily_totals)
        CHECK(date <= ds.train_dates.back()); // no test date feeds the trend
    CHECK(ds.train_indices().size() + ds.test_indices().size() == ds.samples.size());

    auto dir = std::filesystem::temp_directory_path() / "tnet_feat_test";
    std::filesystem::create_directories(dir);
    auto path = (dir / "dataset.csv").string();
    write_dataset_csv(path, ds);
    auto back = read_dataset_csv(path, 2);
    REQUIRE(back.samples.size() == ds.samples.size());
    for (size_t i = 0; i < ds.samples.size(); i += 17) {
        CHECK(back.samples[i].key.cell_id == ds.samples[i].key.cell_id);
        CHECK(back.samples[i].key.start_hour == ds.samples[i].key.start_hour);
        CHECK(back.samples[i].y.t1_hours == ds.samples[i].y.t1_hours);
        for (int c = 0; c < kFeatureCount; ++c)
            CHECK(back.samples[i].x[static_cast<size_t>(c)] ==
                  doctest::Approx(ds.samples[i].x[static_cast<size_t>(c)]).epsilon(1e-8));
    }
    write_manifest((dir / "manifest.txt").string(), ds);
    std::ifstream mf(dir / "manifest.txt");
    std::string content((std::istreambuf_iterator<char>(mf)), std::istreambuf_iterator<char>());
    CHECK(content.find("scaler_fit_dates") != std::string::npos);
    CHECK(content.find("test_dates") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("scaled training columns have zero mean and unit variance") {
    std::vector<ingest::CellDay> days;
    Date d0 = *parse_date("2024-02-01");
    std::mt19937_64 rng(4);
    for (int k = 0; k < 4; ++k)
        for (int c = 0; c < 4; ++c) {
            auto cd = blank_day("cell" + std::to_string(c), d0 + std::chrono::days{k});
            for (int h = 0; h < 24; ++h)
                if (rng() % 2) cd.hourly_inactive[static_cast<size_t>(h)] =
                    static_cast<double>(rng() % 500) / 10.0;
            refresh_totals(cd);
            days.push_back(cd);
        }
    auto ds = build_dataset(days, 1);
    auto train_idx = ds.train_indices();
    int col = 13; // first hourly column
    double mean = 0;
    for (size_t i : train_idx) mean += ds.samples[i].x[static_cast<size_t>(col)];
    mean /= static_cast<double>(train_idx.size());
    double var = 0;
    for (size_t i : train_idx) {
        double d = ds.samples[i].x[static_cast<size_t>(col)] - mean;
        var += d * d;
    }
    var /= static_cast<double>(train_idx.size());
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);
}
