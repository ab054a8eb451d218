#include <doctest.h>

#include "tnet/labels.hpp"

#include <algorithm>
#include <random>

using namespace tnet;
using namespace tnet::labels;

namespace {

// independent brute-force derivation used as the oracle
struct OracleLabels {
    int t1;
    double t2, t3, t4;
};

double oracle_percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    double pos = q * (static_cast<double>(v.size()) - 1.0);
    size_t below = static_cast<size_t>(pos);
    size_t above = below + 1 < v.size() ? below + 1 : below;
    return v[below] * (1.0 - (pos - static_cast<double>(below))) +
           v[above] * (pos - static_cast<double>(below));
}

OracleLabels oracle_derive(const std::array<double, 24>& inact, const std::array<int, 24>& fluct,
                           int start) {
    std::vector<double> wi, wf;
    for (int i = 0; i < 8; ++i) {
        int h = (start - 1 + i) % 24;
        wi.push_back(inact[static_cast<size_t>(h)]);
        wf.push_back(fluct[static_cast<size_t>(h)]);
    }
    OracleLabels o;
    int cnt = 0;
    for (double v : wi)
        if (v > 5.0) ++cnt;
    o.t1 = std::min(8, std::max(2, cnt));
    double factor = (start >= 19 && start <= 24) ? 0.5 : (start >= 8 && start <= 12) ? 1.0 : 1.25;
    o.t2 = std::max(5.0, oracle_percentile(wi, 0.75) * factor);
    o.t3 = std::max(1.0, oracle_percentile(wf, 0.90));
    o.t4 = o.t3;
    return o;
}

} // namespace

TEST_CASE("sensitivity factor hour ranges") {
    CHECK(sensitivity_factor(20) == 0.5);
    CHECK(sensitivity_factor(9) == 1.0);
    CHECK(sensitivity_factor(3) == 1.25);
    for (int h = 1; h <= 24; ++h) {
        double f = sensitivity_factor(h);
        if (h >= 19 && h <= 24) CHECK(f == 0.5);
        else if (h >= 8 && h <= 12) CHECK(f == 1.0);
        else CHECK(f == 1.25);
    }
    CHECK_THROWS_AS(sensitivity_factor(0), std::domain_error);
    CHECK_THROWS_AS(sensitivity_factor(25), std::domain_error);
}

TEST_CASE("percentile uses linear interpolation between order statistics") {
    std::vector<double> v = {0, 0, 0, 0, 10, 10, 20, 40};
    CHECK(percentile_linear(v, 0.75) == doctest::Approx(12.5)); // index 5.25
    CHECK(percentile_linear(v, 0.0) == 0.0);
    CHECK(percentile_linear(v, 1.0) == 40.0);
    CHECK(percentile_linear({7.0}, 0.5) == 7.0);
    CHECK_THROWS_AS(percentile_linear({}, 0.5), std::domain_error);
}

TEST_CASE("derive_labels spot values") {
    std::array<double, 24> inact{};
    std::array<int, 24> fluct{};

    SUBCASE("two hours above five minutes hits the t1 floor") {
        // window of start hour 1 (off-peak): values at hours 1..8
        double win[8] = {10, 0, 0, 6, 0, 0, 0, 0};
        for (int i = 0; i < 8; ++i) inact[static_cast<size_t>(i)] = win[i];
        auto l = derive_labels(inact, fluct, 1);
        CHECK(l.t1_hours == 2);
    }
    SUBCASE("all-zero window gives all floors") {
        auto l = derive_labels(inact, fluct, 5);
        CHECK(l.t1_hours == 2);
        CHECK(l.t2_inactive_min == 5.0);
        CHECK(l.t3_fluct == 1.0);
        CHECK(l.t4_hour_fluct == 1.0);
    }
    SUBCASE("P75 with interpolation at morning factor 1.0") {
        double win[8] = {0, 0, 0, 0, 10, 10, 20, 40};
        for (int i = 0; i < 8; ++i) inact[static_cast<size_t>(8 + i)] = win[i]; // hours 9..16
        auto l = derive_labels(inact, fluct, 9);
        CHECK(l.t2_inactive_min == doctest::Approx(12.5));
    }
    SUBCASE("window wraps modulo 24") {
        inact[0] = 30.0; // hour 1
        inact[23] = 40.0; // hour 24
        auto l = derive_labels(inact, fluct, 24); // window: hours 24,1..7
        CHECK(l.t1_hours == 2);
        // P75 of {40,30,0,0,0,0,0,0} sorted {0,...,30,40}: idx 5.25 -> 0 + 0.25*30
        CHECK(l.t2_inactive_min == doctest::Approx(std::max(5.0, 7.5 * 0.5))); // evening factor
    }
}

TEST_CASE("derive_labels equals the brute-force oracle on 1000 random windows") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> mins(0.0, 60.0);
    for (int rep = 0; rep < 1000; ++rep) {
        std::array<double, 24> inact{};
        std::array<int, 24> fluct{};
        for (int h = 0; h < 24; ++h) {
            if (rng() % 3 == 0) inact[static_cast<size_t>(h)] = mins(rng);
            if (rng() % 4 == 0) fluct[static_cast<size_t>(h)] = static_cast<int>(rng() % 7);
        }
        int start = 1 + static_cast<int>(rng() % 24);
        auto got = derive_labels(inact, fluct, start);
        auto want = oracle_derive(inact, fluct, start);
        CHECK(got.t1_hours == want.t1);
        CHECK(got.t2_inactive_min == doctest::Approx(want.t2).epsilon(1e-9));
        CHECK(got.t3_fluct == doctest::Approx(want.t3).epsilon(1e-9));
        CHECK(got.t4_hour_fluct == doctest::Approx(want.t4).epsilon(1e-9));
        CHECK(got.t1_hours >= 2);
        CHECK(got.t1_hours <= 8);
        CHECK(got.t4_hour_fluct <= got.t3_fluct + 1e-12);
    }
}

TEST_CASE("t2 is monotone under inactive scaling and under the evening factor") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mins(0.0, 40.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::array<double, 24> inact{};
        std::array<int, 24> fluct{};
        for (int h = 0; h < 24; ++h) inact[static_cast<size_t>(h)] = mins(rng);
        int start = 1 + static_cast<int>(rng() % 24);
        auto base = derive_labels(inact, fluct, start);
        double k = 1.0 + static_cast<double>(rng() % 300) / 100.0;
        std::array<double, 24> scaled = inact;
        for (auto& v : scaled) v *= k;
        auto up = derive_labels(scaled, fluct, start);
        CHECK(up.t2_inactive_min >= base.t2_inactive_min - 1e-12);

        // same window values: evening start is never looser than off-peak
        // whenever the off-peak value clears the floor
        auto evening = derive_labels(inact, fluct, 20);
        std::array<double, 24> rotated{};
        for (int i = 0; i < 24; ++i)
            rotated[static_cast<size_t>((2 + i) % 24)] = inact[static_cast<size_t>((19 + i) % 24)];
        auto offpeak = derive_labels(rotated, fluct, 3); // same 8 values, off-peak factor
        if (offpeak.t2_inactive_min > 5.0)
            CHECK(evening.t2_inactive_min <= offpeak.t2_inactive_min + 1e-12);
    }
}

TEST_CASE("ks holdout check") {
    Date d = *parse_date("2024-01-05");
    SUBCASE("identical label populations on both sides") {
        std::vector<ingest::CellDay> days;
        for (int c = 0; c < 40; ++c) {
            ingest::CellDay cd;
            cd.cell_id = "cell" + std::to_string(c);
            cd.date = d;
            cd.hourly_inactive[8] = 30; // identical day for every cell
            cd.hourly_fluct[9] = 2;
            days.push_back(cd);
        }
        auto res = ks_holdout_check(days, 0.3, 42);
        for (const auto& r : res) {
            CHECK(r.statistic == 0.0);
            CHECK(r.p_value == doctest::Approx(1.0));
        }
    }
    SUBCASE("degenerate split throws") {
        std::vector<ingest::CellDay> days(1);
        days[0].cell_id = "only";
        days[0].date = d;
        CHECK_THROWS_AS(ks_holdout_check(days, 0.999999, 1), std::invalid_argument);
        CHECK_THROWS_AS(ks_holdout_check(days, 0.0, 1), std::invalid_argument);
    }
    SUBCASE("random cells at fraction 0.15: derivations coincide, all p above 0.05") {
        std::mt19937_64 rng(5);
        std::vector<ingest::CellDay> days;
        for (int c = 0; c < 120; ++c) {
            ingest::CellDay cd;
            cd.cell_id = "cell" + std::to_string(c);
            cd.date = d;
            for (int h = 0; h < 24; ++h) {
                if (rng() % 3 == 0)
                    cd.hourly_inactive[static_cast<size_t>(h)] =
                        static_cast<double>(rng() % 600) / 10.0;
                if (rng() % 5 == 0) cd.hourly_fluct[static_cast<size_t>(h)] = static_cast<int>(rng() % 3);
            }
            days.push_back(cd);
        }
        auto res = ks_holdout_check(days, 0.15, 42);
        for (const auto& r : res) {
            CHECK(r.n_holdout_cells > 0);
            CHECK(r.n_rest_cells > 0);
            CHECK(r.p_value > 0.05);
            CHECK(r.statistic == 0.0); // local rule: both derivations identical
        }
    }
}
