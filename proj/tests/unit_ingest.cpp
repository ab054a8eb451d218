#include <doctest.h>

#include "tnet/ingest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

using namespace tnet;
using namespace tnet::ingest;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() / "tnet_ingest_test";
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

const std::string kHeader =
    "snapshot_id,vendor,region,source_system_name,alarmCustomAttr,alarm_attributes,"
    "alarm_start,duration_min\n";

AlarmRecord make_record(const std::string& cell, MinuteTime start, double dur,
                        MinuteTime snap = 0, const std::string& file = "f") {
    AlarmRecord r;
    r.cell_id = cell;
    r.alarm_start = start;
    r.duration_min = dur;
    r.snapshot_time = snap ? snap : start + 120;
    r.source_file = file;
    return r;
}

} // namespace

TEST_CASE("parse_snapshot extracts the filename timestamp and all valid rows") {
    TempDir tmp;
    auto p = tmp.path / "alarms_20240105_0910.csv";
    write_file(p, kHeader +
                      "1,X,REG_A,OSSX-NX_1042,CELL=NX_1042;SEV=MAJ,,2024-01-05 08:00,12.5\n"
                      "2,Y,REG_B,BSSY-01-NY_2210-SITE1,,,2024-01-05 09:00,4\n"
                      "3,Z,REG_C,OSSZ-NZ_0007,,\"{\"\"cell_name\"\":\"\"NZ_0007\"\",\"\"code\"\":41}\","
                      "2024-01-05 07:30,30\n");
    auto result = parse_snapshot(p.string());
    REQUIRE(result.records.size() == 3);
    CHECK(result.rows_skipped == 0);
    CHECK(format_minute(result.records[0].snapshot_time) == "2024-01-05 09:10");
    CHECK(result.records[0].cell_id == "NX_1042");
    CHECK(result.records[1].cell_id == "NY_2210");
    CHECK(result.records[2].cell_id == "NZ_0007");
    CHECK(result.records[2].duration_min == 30.0);
}

TEST_CASE("parse_snapshot edge cases") {
    TempDir tmp;
    SUBCASE("header only gives an empty list") {
        auto p = tmp.path / "alarms_20240105_0000.csv";
        write_file(p, kHeader);
        auto result = parse_snapshot(p.string());
        CHECK(result.records.empty());
        CHECK(result.rows_skipped == 0);
    }
    SUBCASE("garbled duration is skipped and counted") {
        auto p = tmp.path / "alarms_20240105_0100.csv";
        write_file(p, kHeader + "1,X,REG_A,s,CELL=NX_1;SEV=MAJ,,2024-01-05 00:30,abc\n");
        auto result = parse_snapshot(p.string());
        CHECK(result.records.empty());
        CHECK(result.rows_skipped == 1);
    }
    SUBCASE("unknown vendor is counted separately") {
        auto p = tmp.path / "alarms_20240105_0200.csv";
        write_file(p, kHeader + "1,Q,REG_A,s,CELL=NX_1;SEV=MAJ,,2024-01-05 00:30,5\n");
        auto result = parse_snapshot(p.string());
        CHECK(result.unknown_vendor_rows == 1);
        CHECK(result.rows_skipped == 0);
    }
    SUBCASE("alarm starting after the snapshot is skipped") {
        auto p = tmp.path / "alarms_20240105_0300.csv";
        write_file(p, kHeader + "1,X,REG_A,s,CELL=NX_1;SEV=MAJ,,2024-01-05 09:30,5\n");
        CHECK(parse_snapshot(p.string()).rows_skipped == 1);
    }
    SUBCASE("missing timestamp token is fatal") {
        auto p = tmp.path / "alarms_garbled.csv";
        write_file(p, kHeader);
        CHECK_THROWS_AS(parse_snapshot(p.string()), std::runtime_error);
        auto q = tmp.path / "alarms_20241305_0910.csv"; // month 13
        write_file(q, kHeader);
        CHECK_THROWS_AS(parse_snapshot(q.string()), std::runtime_error);
    }
    SUBCASE("wrong header schema is fatal") {
        auto p = tmp.path / "alarms_20240105_0400.csv";
        write_file(p, "a,b,c\n");
        CHECK_THROWS_AS(parse_snapshot(p.string()), std::runtime_error);
    }
}

TEST_CASE("extract_cell_name per vendor grammar") {
    std::map<std::string, std::string> raw;
    raw["alarmCustomAttr"] = "CELL=NX_1042;SEV=MAJ";
    CHECK(extract_cell_name(Vendor::X, raw) == "NX_1042");
    raw["alarmCustomAttr"] = "SEV=MAJ;CELL=NX_7";
    CHECK(extract_cell_name(Vendor::X, raw) == "NX_7");
    raw["alarmCustomAttr"] = "SEV=MAJ";
    CHECK_FALSE(extract_cell_name(Vendor::X, raw).has_value());
    raw["alarmCustomAttr"] = "CELL=;SEV=MAJ";
    CHECK_FALSE(extract_cell_name(Vendor::X, raw).has_value());

    // vendor Y: characters [8,15), trimmed
    raw.clear();
    raw["source_system_name"] = "BSSY-01-NY_2210-SITE7";
    CHECK(extract_cell_name(Vendor::Y, raw) == "NY_2210");
    raw["source_system_name"] = "BSSY-01-NY_3   trailing";
    CHECK(extract_cell_name(Vendor::Y, raw) == "NY_3");
    raw["source_system_name"] = "short";
    CHECK_FALSE(extract_cell_name(Vendor::Y, raw).has_value());

    raw.clear();
    raw["alarm_attributes"] = "{\"cell_name\":\"NZ_0007\",\"code\":41}";
    CHECK(extract_cell_name(Vendor::Z, raw) == "NZ_0007");
    raw["alarm_attributes"] = "{\"code\":41}";
    CHECK_FALSE(extract_cell_name(Vendor::Z, raw).has_value());
    raw.clear();
    CHECK_FALSE(extract_cell_name(Vendor::Z, raw).has_value());
}

TEST_CASE("dedup keeps the longest duration per (cell, alarm_start)") {
    MinuteTime t0 = *parse_minute("2024-01-05 09:00");
    SUBCASE("max duration survives") {
        auto out = dedup({make_record("c1", t0, 5.0), make_record("c1", t0, 12.0)});
        REQUIRE(out.size() == 1);
        CHECK(out[0].duration_min == 12.0);
    }
    SUBCASE("single record unchanged") {
        auto out = dedup({make_record("c1", t0, 5.0)});
        REQUIRE(out.size() == 1);
        CHECK(out[0].duration_min == 5.0);
    }
    SUBCASE("duration tie falls to latest snapshot, then smallest file name") {
        auto a = make_record("c1", t0, 5.0, t0 + 10, "b.csv");
        auto b = make_record("c1", t0, 5.0, t0 + 20, "z.csv");
        auto out = dedup({a, b});
        REQUIRE(out.size() == 1);
        CHECK(out[0].source_file == "z.csv"); // later snapshot wins
        auto c = make_record("c1", t0, 5.0, t0 + 20, "a.csv");
        out = dedup({b, c});
        CHECK(out[0].source_file == "a.csv"); // same snapshot: smaller name wins
    }
    SUBCASE("matches a brute-force group-by-max oracle on random records") {
        std::mt19937_64 rng(99);
        std::vector<AlarmRecord> records;
        for (int i = 0; i < 50; ++i) {
            std::string cell = "c" + std::to_string(rng() % 6);
            MinuteTime start = t0 + static_cast<MinuteTime>(rng() % 4) * 30;
            double dur = static_cast<double>(rng() % 100) / 2.0;
            records.push_back(make_record(cell, start, dur, t0 + 200 + (rng() % 50), "f"));
        }
        std::map<std::pair<std::string, MinuteTime>, double> oracle;
        for (const auto& r : records) {
            auto key = std::make_pair(r.cell_id, r.alarm_start);
            auto it = oracle.find(key);
            if (it == oracle.end() || r.duration_min > it->second) oracle[key] = r.duration_min;
        }
        auto out = dedup(records);
        REQUIRE(out.size() == oracle.size());
        for (const auto& r : out)
            CHECK(r.duration_min == oracle.at(std::make_pair(r.cell_id, r.alarm_start)));
        // idempotence
        auto again = dedup(out);
        REQUIRE(again.size() == out.size());
        for (size_t i = 0; i < out.size(); ++i) {
            CHECK(again[i].cell_id == out[i].cell_id);
            CHECK(again[i].duration_min == out[i].duration_min);
        }
    }
}

TEST_CASE("aggregate buckets overlap minutes and start-hour fluctuations") {
    Date d = *parse_date("2024-01-05");
    MinuteTime day0 = date_to_minute(d);

    SUBCASE("alarm fully inside one hour") {
        auto out = aggregate_cell_days({make_record("c", day0 + 9 * 60 + 20, 30.0)}, d);
        REQUIRE(out.size() == 1);
        CHECK(out[0].hourly_inactive[9] == doctest::Approx(30.0)); // bucket 10: 09:00-10:00
        CHECK(out[0].hourly_fluct[9] == 1);
        CHECK(out[0].total_inactive_min == doctest::Approx(30.0));
        CHECK(out[0].total_fluct == 1);
    }
    SUBCASE("alarm spanning an hour boundary splits 10/20") {
        auto out = aggregate_cell_days({make_record("c", day0 + 9 * 60 + 50, 30.0)}, d);
        REQUIRE(out.size() == 1);
        CHECK(out[0].hourly_inactive[9] == doctest::Approx(10.0));
        CHECK(out[0].hourly_inactive[10] == doctest::Approx(20.0));
        CHECK(out[0].hourly_fluct[9] == 1);
        CHECK(out[0].hourly_fluct[10] == 0);
    }
    SUBCASE("no records gives no cell-days") {
        CHECK(aggregate_cell_days({}, d).empty());
    }
    SUBCASE("midnight-spanning alarm is clipped; the spill lands on the next date") {
        auto rec = make_record("c", day0 + 23 * 60 + 30, 60.0, day0 + 25 * 60);
        AggregateStats stats;
        auto today = aggregate_cell_days({rec}, d, &stats);
        REQUIRE(today.size() == 1);
        CHECK(today[0].hourly_inactive[23] == doctest::Approx(30.0));
        CHECK(today[0].total_inactive_min == doctest::Approx(30.0));
        CHECK(stats.clipped_records == 1);
        auto next = aggregate_cell_days({rec}, d + std::chrono::days{1});
        REQUIRE(next.size() == 1);
        CHECK(next[0].hourly_inactive[0] == doctest::Approx(30.0));
        CHECK(next[0].total_fluct == 0); // fluctuation belongs to the start date
    }
    SUBCASE("hour bucket is capped at 60 minutes") {
        auto out = aggregate_cell_days({make_record("c", day0 + 60, 30.0),
                                        make_record("c", day0 + 70, 45.0)},
                                       d);
        REQUIRE(out.size() == 1);
        CHECK(out[0].hourly_inactive[1] <= 60.0);
    }
}

TEST_CASE("aggregation invariants on random non-overlapping alarms") {
    Date d = *parse_date("2024-01-08");
    MinuteTime day0 = date_to_minute(d);
    std::mt19937_64 rng(7);
    std::vector<AlarmRecord> records;
    double total_duration = 0;
    for (int cell = 0; cell < 5; ++cell) {
        MinuteTime cursor = day0;
        while (true) {
            cursor += 20 + static_cast<MinuteTime>(rng() % 200);
            double dur = 1.0 + static_cast<double>(rng() % 180) / 10.0;
            if (cursor + static_cast<MinuteTime>(dur) + 1 >= day0 + 1440) break;
            records.push_back(make_record("cell" + std::to_string(cell), cursor, dur));
            cursor += static_cast<MinuteTime>(dur) + 1;
            total_duration += dur;
        }
    }
    auto out = aggregate_cell_days(records, d);
    double agg_total = 0;
    int fluct_total = 0;
    for (const auto& cd : out) {
        agg_total += cd.total_inactive_min;
        fluct_total += cd.total_fluct;
        double check_sum = 0;
        for (double h : cd.hourly_inactive) {
            CHECK(h >= 0.0);
            CHECK(h <= 60.0);
            check_sum += h;
        }
        CHECK(cd.total_inactive_min == doctest::Approx(check_sum).epsilon(1e-9));
    }
    CHECK(agg_total == doctest::Approx(total_duration).epsilon(1e-6));
    CHECK(fluct_total == static_cast<int>(records.size())); // all (cell,start) distinct

    // permutation invariance
    std::vector<AlarmRecord> shuffled = records;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto out2 = aggregate_cell_days(shuffled, d);
    REQUIRE(out2.size() == out.size());
    for (size_t i = 0; i < out.size(); ++i) {
        CHECK(out2[i].cell_id == out[i].cell_id);
        for (int h = 0; h < 24; ++h)
            CHECK(out2[i].hourly_inactive[h] == doctest::Approx(out[i].hourly_inactive[h]));
    }
}

TEST_CASE("cell-day CSV round-trip") {
    Date d = *parse_date("2024-01-05");
    MinuteTime day0 = date_to_minute(d);
    auto days = aggregate_cell_days({make_record("NX_0001", day0 + 130, 25.5),
                                     make_record("NX_0002", day0 + 700, 12.25)},
                                    d);
    TempDir tmp;
    auto p = (tmp.path / "celldays.csv").string();
    write_cell_days(p, days);
    auto back = read_cell_days(p);
    REQUIRE(back.size() == days.size());
    for (size_t i = 0; i < days.size(); ++i) {
        CHECK(back[i].cell_id == days[i].cell_id);
        CHECK(back[i].date == days[i].date);
        for (int h = 0; h < 24; ++h) {
            CHECK(back[i].hourly_inactive[h] == doctest::Approx(days[i].hourly_inactive[h]));
            CHECK(back[i].hourly_fluct[h] == days[i].hourly_fluct[h]);
        }
    }
}
