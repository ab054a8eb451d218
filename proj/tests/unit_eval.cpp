#include <doctest.h>

#include "tnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace tnet::eval;

namespace {

// independent sign-flip enumeration with its own midranking
double oracle_wilcoxon_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) d.push_back(a[i] - b[i]);
    size_t n = d.size();
    if (n == 0) return 1.0;
    std::vector<double> mag(n);
    for (size_t i = 0; i < n; ++i) mag[i] = std::abs(d[i]);
    std::vector<double> ranks(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double less = 0, equal = 0;
        for (size_t j = 0; j < n; ++j) {
            if (mag[j] < mag[i]) ++less;
            if (mag[j] == mag[i]) ++equal;
        }
        ranks[i] = less + (equal + 1.0) / 2.0;
    }
    double w_obs = 0;
    for (size_t i = 0; i < n; ++i)
        if (d[i] > 0) w_obs += ranks[i];
    long total = 1L << n;
    long le = 0, ge = 0;
    for (long mask = 0; mask < total; ++mask) {
        double w = 0;
        for (size_t bit = 0; bit < n; ++bit)
            if (mask & (1L << bit)) w += ranks[bit];
        if (w <= w_obs + 1e-12) ++le;
        if (w >= w_obs - 1e-12) ++ge;
    }
    return std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total));
}

double oracle_ks_stat(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> pooled = x;
    pooled.insert(pooled.end(), y.begin(), y.end());
    double d = 0;
    for (double v : pooled) {
        double fx = 0, fy = 0;
        for (double e : x)
            if (e <= v) ++fx;
        for (double e : y)
            if (e <= v) ++fy;
        d = std::max(d, std::abs(fx / static_cast<double>(x.size()) -
                                 fy / static_cast<double>(y.size())));
    }
    return d;
}

} // namespace

TEST_CASE("metrics spot values") {
    CHECK_THROWS_AS(metrics({}, {}), std::domain_error);

    auto perfect = metrics({1, 2, 3}, {1, 2, 3});
    CHECK(perfect.mae == 0.0);
    CHECK(perfect.rmse == 0.0);
    CHECK(perfect.r2 == 1.0);

    auto constant = metrics({1, 2, 3}, {2, 2, 2});
    CHECK(constant.mae == doctest::Approx(2.0 / 3.0));
    CHECK(constant.rmse == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(constant.r2 == doctest::Approx(0.0));

    // zero-variance target
    auto degenerate = metrics({2, 2}, {2, 2});
    CHECK(degenerate.r2_defined);
    CHECK(degenerate.r2 == 0.0);
    auto undefined = metrics({2, 2}, {3, 3});
    CHECK_FALSE(undefined.r2_defined);
}

TEST_CASE("rmse dominates mae and metrics are permutation invariant") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> dist;
    std::vector<double> y(40), yhat(40);
    for (int i = 0; i < 40; ++i) {
        y[i] = dist(rng);
        yhat[i] = dist(rng);
    }
    auto m = metrics(y, yhat);
    CHECK(m.rmse >= m.mae);
    CHECK(m.r2 <= 1.0);

    std::vector<size_t> perm(40);
    for (size_t i = 0; i < 40; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> y2(40), yhat2(40);
    for (size_t i = 0; i < 40; ++i) {
        y2[i] = y[perm[i]];
        yhat2[i] = yhat[perm[i]];
    }
    auto m2 = metrics(y2, yhat2);
    CHECK(m2.mae == doctest::Approx(m.mae).epsilon(1e-12));
    CHECK(m2.rmse == doctest::Approx(m.rmse).epsilon(1e-12));
    CHECK(m2.r2 == doctest::Approx(m.r2).epsilon(1e-12));
}

TEST_CASE("wilcoxon exact values") {
    SUBCASE("identical vectors are degenerate with p = 1") {
        auto r = wilcoxon_signed_rank({1, 2, 3}, {1, 2, 3});
        CHECK(r.degenerate);
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("five all-positive differences give p = 2/32") {
        auto r = wilcoxon_signed_rank({2, 4, 6, 8, 10}, {1, 2, 3, 4, 5});
        CHECK(r.exact);
        CHECK(r.statistic == doctest::Approx(15.0));
        CHECK(r.p_value == doctest::Approx(0.0625).epsilon(1e-12));
    }
    SUBCASE("textbook eight-pair case matches enumeration") {
        std::vector<double> a = {125, 115, 130, 140, 140, 115, 140, 125};
        std::vector<double> b = {110, 122, 125, 120, 140, 124, 123, 137};
        auto r = wilcoxon_signed_rank(a, b);
        CHECK(r.exact);
        CHECK(r.n_used == 7); // one zero difference dropped
        CHECK(std::abs(r.p_value - oracle_wilcoxon_p(a, b)) < 1e-9);
    }
}

TEST_CASE("wilcoxon exact mode equals brute-force enumeration on random cases") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> size_dist(1, 12);
    std::uniform_int_distribution<int> value_dist(-4, 4);
    for (int rep = 0; rep < 1000; ++rep) {
        int n = size_dist(rng);
        std::vector<double> a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            a[static_cast<size_t>(i)] = value_dist(rng);
            b[static_cast<size_t>(i)] = value_dist(rng); // integer values force ties
        }
        auto r = wilcoxon_signed_rank(a, b);
        double oracle = oracle_wilcoxon_p(a, b);
        CHECK(std::abs(r.p_value - oracle) < 1e-9);
    }
}

TEST_CASE("wilcoxon normal approximation behaves sensibly") {
    std::vector<double> a(40), b(40);
    for (int i = 0; i < 40; ++i) {
        a[static_cast<size_t>(i)] = i + 1.0;
        b[static_cast<size_t>(i)] = 0.0;
    }
    auto strong = wilcoxon_signed_rank(a, b);
    CHECK_FALSE(strong.exact);
    CHECK(strong.p_value < 1e-6);

    std::mt19937_64 rng(8);
    std::normal_distribution<double> dist;
    for (int i = 0; i < 40; ++i) {
        double x = dist(rng);
        a[static_cast<size_t>(i)] = x;
        b[static_cast<size_t>(i)] = x + dist(rng) * 0.01 * (i % 2 ? 1 : -1);
    }
    auto weak = wilcoxon_signed_rank(a, b);
    CHECK(weak.p_value > 0.01);
    CHECK(weak.p_value <= 1.0);
}

TEST_CASE("per-sample error averages the four absolute errors") {
    CHECK(per_sample_error({1, 2, 3, 4}, {1, 2, 3, 4}) == 0.0);
    CHECK(per_sample_error({2, 3, 4, 5}, {1, 2, 3, 4}) == doctest::Approx(1.0));
    CHECK(per_sample_error({5, 2, 3, 4}, {1, 2, 3, 4}) == doctest::Approx(1.0));
}

TEST_CASE("ks two-sample statistic and p-value") {
    auto same = ks_two_sample({1, 2, 3}, {1, 2, 3});
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == doctest::Approx(1.0));

    auto apart = ks_two_sample({1, 2, 3}, {10, 11, 12});
    CHECK(apart.statistic == 1.0);

    CHECK_THROWS_AS(ks_two_sample({}, {1.0}), std::domain_error);

    std::mt19937_64 rng(17);
    std::normal_distribution<double> dist;
    std::vector<double> x(100), y(100);
    for (int i = 0; i < 100; ++i) {
        x[static_cast<size_t>(i)] = dist(rng);
        y[static_cast<size_t>(i)] = dist(rng) + 0.2;
    }
    auto r = ks_two_sample(x, y);
    CHECK(r.statistic == doctest::Approx(oracle_ks_stat(x, y)).epsilon(1e-15));
}

TEST_CASE("naive baseline has zero R2 on its own fitting set") {
    std::array<std::vector<double>, 4> labels;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> dist(3.0, 1.5);
    for (auto& v : labels)
        for (int i = 0; i < 50; ++i) v.push_back(dist(rng));
    auto mm = naive_baseline(labels, labels);
    for (const auto& m : mm.per_target) CHECK(m.r2 == doctest::Approx(0.0).epsilon(1e-12));

    std::array<std::vector<double>, 4> constant;
    for (auto& v : constant) v.assign(10, 2.5);
    auto cm = naive_baseline(constant, constant);
    for (const auto& m : cm.per_target) CHECK(m.mae == doctest::Approx(0.0));
}

TEST_CASE("alpha stats and quantile spread match a brute-force pass") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(0.1, 5.0);
    std::vector<std::array<double, 4>> rows;
    for (int i = 0; i < 300; ++i)
        rows.push_back({dist(rng), dist(rng), dist(rng), dist(rng)});
    auto st = alpha_stats(rows);
    for (int t = 0; t < 4; ++t) {
        double m = 0;
        for (const auto& r : rows) m += r[static_cast<size_t>(t)];
        m /= 300.0;
        double v = 0;
        for (const auto& r : rows)
            v += (r[static_cast<size_t>(t)] - m) * (r[static_cast<size_t>(t)] - m);
        CHECK(st.mean[static_cast<size_t>(t)] == doctest::Approx(m).epsilon(1e-9));
        CHECK(st.stddev[static_cast<size_t>(t)] == doctest::Approx(std::sqrt(v / 300.0)).epsilon(1e-9));
    }

    auto rep = quantile_spread_report(rows);
    for (int t = 0; t < 4; ++t) {
        int flags = 0;
        for (const auto& r : rows)
            if (r[static_cast<size_t>(t)] >
                rep.mean[static_cast<size_t>(t)] + 2 * rep.stddev[static_cast<size_t>(t)])
                ++flags;
        CHECK(rep.flagged[static_cast<size_t>(t)] == flags);
    }

    std::vector<std::array<double, 4>> constant(5, {1, 1, 1, 1});
    auto crep = quantile_spread_report(constant);
    for (int t = 0; t < 4; ++t) {
        CHECK(crep.stddev[static_cast<size_t>(t)] == 0.0);
        CHECK(crep.flagged[static_cast<size_t>(t)] == 0);
    }
}

TEST_CASE("report files carry one best marker per row") {
    std::array<std::vector<double>, 4> y;
    for (auto& v : y) v = {1, 2, 3, 4, 5};
    std::array<std::vector<double>, 4> good = {{{1, 2, 3, 4, 5.2},
                                                {1, 2.1, 3, 4, 5},
                                                {1.1, 2, 3, 4, 5},
                                                {1, 2, 3.3, 4, 5}}};
    std::array<std::vector<double>, 4> bad;
    for (auto& v : bad) v = {2, 3, 4, 5, 6};
    std::vector<ModelMetrics> models = {evaluate_model("good", y, good),
                                        evaluate_model("bad", y, bad)};
    auto dir = std::filesystem::temp_directory_path() / "tnet_eval_test";
    std::filesystem::create_directories(dir);
    write_metrics_csv((dir / "metrics.csv").string(), models);
    write_metrics_text((dir / "metrics.txt").string(), models);

    std::ifstream in(dir / "metrics.txt");
    std::string line;
    int data_rows = 0;
    while (std::getline(in, line)) {
        if (line.rfind("MAE", 0) == 0 || line.rfind("RMSE", 0) == 0 || line.rfind("R2", 0) == 0) {
            ++data_rows;
            CHECK(std::count(line.begin(), line.end(), '*') >= 1);
        }
    }
    CHECK(data_rows == 15); // 3 metrics x (4 targets + average)
    std::filesystem::remove_all(dir);
}
