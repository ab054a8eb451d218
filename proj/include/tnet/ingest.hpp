#pragma once

#include "tnet/common.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tnet::ingest {

// One row of an alarm snapshot file after field extraction.
struct AlarmRecord {
    MinuteTime snapshot_time = 0;
    Vendor vendor = Vendor::X;
    Region region = Region::A;
    std::string cell_id;
    MinuteTime alarm_start = 0;
    double duration_min = 0.0;
    std::string source_file;
    std::map<std::string, std::string> raw_fields;
};

// Per-cell per-date aggregate. hourly_* index 0 holds hour 1, i.e. the
// bucket covering clock time [0,1).
struct CellDay {
    std::string cell_id;
    Date date{};
    Vendor vendor = Vendor::X;
    Region region = Region::A;
    std::array<double, 24> hourly_inactive{};
    std::array<int, 24> hourly_fluct{};
    double total_inactive_min = 0.0;
    int total_fluct = 0;
};

struct ParseResult {
    std::vector<AlarmRecord> records;
    int rows_skipped = 0;        // unparseable mandatory fields
    int unknown_vendor_rows = 0; // counted separately, also skipped
};

inline const std::vector<std::string> kSnapshotHeader = {
    "snapshot_id", "vendor",           "region",      "source_system_name",
    "alarmCustomAttr", "alarm_attributes", "alarm_start", "duration_min"};

// Filename must carry an alarms_YYYYMMDD_HHMM.csv timestamp token; a
// missing or garbled token is a fatal error naming the file.
ParseResult parse_snapshot(const std::string& path);

// Vendor X: value of key CELL in the ;-delimited alarmCustomAttr.
// Vendor Y: characters [8,15) of source_system_name, whitespace-trimmed.
// Vendor Z: value of key cell_name in the brace-delimited alarm_attributes.
std::optional<std::string> extract_cell_name(Vendor vendor,
                                             const std::map<std::string, std::string>& raw_fields);

// Keeps the longest-duration record per (cell_id, alarm_start); ties fall to
// the latest snapshot_time, then the lexicographically smallest source file.
// Output is ordered by (cell_id, alarm_start).
std::vector<AlarmRecord> dedup(std::vector<AlarmRecord> records);

struct AggregateStats {
    int clipped_records = 0; // alarms running past the day boundary
};

// Buckets overlap minutes into the 24 hours of `date`; fluctuations count
// once in the bucket holding alarm_start. Alarms spanning midnight are
// clipped at the boundary. Output ordered by cell_id.
std::vector<CellDay> aggregate_cell_days(const std::vector<AlarmRecord>& records, Date date,
                                         AggregateStats* stats = nullptr);

struct IngestSummary {
    int files = 0;
    int rows = 0;
    int rows_skipped = 0;
    int unknown_vendor_rows = 0;
    int spill_dropped = 0; // midnight spill onto dates with no starting alarms
};

// Parses every alarms_*.csv under dir, dedups across files, and aggregates
// one CellDay set per date on which at least one alarm starts.
std::vector<CellDay> ingest_directory(const std::string& dir, IngestSummary* summary = nullptr);

void write_cell_days(const std::string& path, const std::vector<CellDay>& days);
std::vector<CellDay> read_cell_days(const std::string& path);

} // namespace tnet::ingest
