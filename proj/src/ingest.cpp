#include "tnet/ingest.hpp"

#include "tnet/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace tnet::ingest {

namespace {

std::optional<double> parse_double_strict(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// alarms_YYYYMMDD_HHMM.csv -> snapshot minute
std::optional<MinuteTime> filename_timestamp(const std::string& filename) {
    const std::string prefix = "alarms_";
    if (filename.size() != prefix.size() + 8 + 1 + 4 + 4) return std::nullopt;
    if (filename.rfind(prefix, 0) != 0 || filename.substr(filename.size() - 4) != ".csv")
        return std::nullopt;
    std::string token = filename.substr(prefix.size(), 13); // YYYYMMDD_HHMM
    if (token[8] != '_') return std::nullopt;
    for (size_t i = 0; i < token.size(); ++i)
        if (i != 8 && !std::isdigit(static_cast<unsigned char>(token[i]))) return std::nullopt;
    int year = std::stoi(token.substr(0, 4));
    unsigned month = static_cast<unsigned>(std::stoi(token.substr(4, 2)));
    unsigned day = static_cast<unsigned>(std::stoi(token.substr(6, 2)));
    int hh = std::stoi(token.substr(9, 2));
    int mm = std::stoi(token.substr(11, 2));
    if (hh > 23 || mm > 59) return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}};
    if (!ymd.ok()) return std::nullopt;
    return date_to_minute(std::chrono::sys_days{ymd}) + hh * 60 + mm;
}

} // namespace

std::optional<std::string> extract_cell_name(Vendor vendor,
                                             const std::map<std::string, std::string>& raw) {
    auto field = [&](const char* name) -> std::optional<std::string> {
        auto it = raw.find(name);
        if (it == raw.end()) return std::nullopt;
        return it->second;
    };
    switch (vendor) {
    case Vendor::X: {
        auto attr = field("alarmCustomAttr");
        if (!attr) return std::nullopt;
        // semicolon-delimited KEY=VALUE pairs
        size_t pos = 0;
        while (pos <= attr->size()) {
            size_t end = attr->find(';', pos);
            std::string_view item(attr->data() + pos,
                                  (end == std::string::npos ? attr->size() : end) - pos);
            size_t eq = item.find('=');
            if (eq != std::string_view::npos && trim(item.substr(0, eq)) == "CELL") {
                std::string value = trim(item.substr(eq + 1));
                if (!value.empty()) return value;
                return std::nullopt;
            }
            if (end == std::string::npos) break;
            pos = end + 1;
        }
        return std::nullopt;
    }
    case Vendor::Y: {
        auto src = field("source_system_name");
        if (!src || src->size() < 15) return std::nullopt;
        std::string value = trim(std::string_view(*src).substr(8, 7));
        if (value.empty()) return std::nullopt;
        return value;
    }
    case Vendor::Z: {
        auto attr = field("alarm_attributes");
        if (!attr) return std::nullopt;
        // brace-delimited "key":"value" pairs; only cell_name is needed
        size_t pos = attr->find("\"cell_name\"");
        if (pos == std::string::npos) return std::nullopt;
        pos = attr->find(':', pos);
        if (pos == std::string::npos) return std::nullopt;
        pos = attr->find('"', pos);
        if (pos == std::string::npos) return std::nullopt;
        size_t end = attr->find('"', pos + 1);
        if (end == std::string::npos || end == pos + 1) return std::nullopt;
        return attr->substr(pos + 1, end - pos - 1);
    }
    }
    return std::nullopt;
}

ParseResult parse_snapshot(const std::string& path) {
    std::string filename = std::filesystem::path(path).filename().string();
    auto snap_time = filename_timestamp(filename);
    if (!snap_time)
        throw std::runtime_error("snapshot filename lacks a valid alarms_YYYYMMDD_HHMM token: " +
                                 filename);

    csv::Table table = csv::read_file(path);
    if (table.header != kSnapshotHeader)
        throw std::runtime_error("snapshot header does not match the expected schema: " + path);

    ParseResult result;
    for (const auto& row : table.rows) {
        if (row.size() != kSnapshotHeader.size()) {
            ++result.rows_skipped;
            continue;
        }
        std::map<std::string, std::string> fields;
        for (size_t i = 0; i < row.size(); ++i) fields[kSnapshotHeader[i]] = row[i];

        auto vendor = parse_vendor(fields["vendor"]);
        if (!vendor) {
            ++result.unknown_vendor_rows;
            continue;
        }
        auto region = parse_region(fields["region"]);
        auto start = parse_minute(fields["alarm_start"]);
        auto duration = parse_double_strict(fields["duration_min"]);
        auto cell = extract_cell_name(*vendor, fields);
        if (!region || !start || !duration || *duration < 0.0 || !cell ||
            *start > *snap_time) {
            ++result.rows_skipped;
            continue;
        }
        AlarmRecord rec;
        rec.snapshot_time = *snap_time;
        rec.vendor = *vendor;
        rec.region = *region;
        rec.cell_id = *cell;
        rec.alarm_start = *start;
        rec.duration_min = *duration;
        rec.source_file = filename;
        rec.raw_fields = std::move(fields);
        result.records.push_back(std::move(rec));
    }
    return result;
}

std::vector<AlarmRecord> dedup(std::vector<AlarmRecord> records) {
    std::sort(records.begin(), records.end(), [](const AlarmRecord& a, const AlarmRecord& b) {
        if (a.cell_id != b.cell_id) return a.cell_id < b.cell_id;
        if (a.alarm_start != b.alarm_start) return a.alarm_start < b.alarm_start;
        if (a.duration_min != b.duration_min) return a.duration_min > b.duration_min;
        if (a.snapshot_time != b.snapshot_time) return a.snapshot_time > b.snapshot_time;
        return a.source_file < b.source_file;
    });
    std::vector<AlarmRecord> out;
    out.reserve(records.size());
    for (auto& rec : records) {
        if (!out.empty() && out.back().cell_id == rec.cell_id &&
            out.back().alarm_start == rec.alarm_start)
            continue;
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<CellDay> aggregate_cell_days(const std::vector<AlarmRecord>& records, Date date,
                                         AggregateStats* stats) {
    MinuteTime day_begin = date_to_minute(date);
    MinuteTime day_end = day_begin + 1440;
    std::map<std::string, CellDay> cells;
    for (const auto& rec : records) {
        MinuteTime start = rec.alarm_start;
        // duration may be fractional; treat the alarm as the real interval
        // [start, start + duration)
        double end = static_cast<double>(start) + rec.duration_min;
        bool starts_today = start >= day_begin && start < day_end;
        double ov_begin = std::max(static_cast<double>(start), static_cast<double>(day_begin));
        double ov_end = std::min(end, static_cast<double>(day_end));
        if (!starts_today && ov_end <= ov_begin) continue;

        auto it = cells.find(rec.cell_id);
        if (it == cells.end()) {
            CellDay cd;
            cd.cell_id = rec.cell_id;
            cd.date = date;
            cd.vendor = rec.vendor;
            cd.region = rec.region;
            it = cells.emplace(rec.cell_id, std::move(cd)).first;
        }
        CellDay& cd = it->second;
        if (stats && end > static_cast<double>(day_end)) ++stats->clipped_records;
        for (int h = 0; h < 24; ++h) {
            double bucket_begin = static_cast<double>(day_begin + h * 60);
            double bucket_end = bucket_begin + 60.0;
            double lo = std::max(ov_begin, bucket_begin);
            double hi = std::min(ov_end, bucket_end);
            if (hi > lo) cd.hourly_inactive[h] = std::min(60.0, cd.hourly_inactive[h] + (hi - lo));
        }
        if (starts_today) {
            int h = static_cast<int>((start - day_begin) / 60);
            cd.hourly_fluct[h] += 1;
        }
    }
    std::vector<CellDay> out;
    out.reserve(cells.size());
    for (auto& [_, cd] : cells) {
        cd.total_inactive_min = 0;
        cd.total_fluct = 0;
        for (int h = 0; h < 24; ++h) {
            cd.total_inactive_min += cd.hourly_inactive[h];
            cd.total_fluct += cd.hourly_fluct[h];
        }
        out.push_back(std::move(cd));
    }
    return out;
}

std::vector<CellDay> ingest_directory(const std::string& dir, IngestSummary* summary) {
    std::vector<std::string> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (name.rfind("alarms_", 0) == 0 && name.size() > 4 &&
            name.substr(name.size() - 4) == ".csv")
            paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw std::runtime_error("no alarms_*.csv snapshot files under " + dir);

    std::vector<AlarmRecord> all;
    IngestSummary sum;
    for (const auto& p : paths) {
        ParseResult r = parse_snapshot(p);
        ++sum.files;
        sum.rows += static_cast<int>(r.records.size()) + r.rows_skipped + r.unknown_vendor_rows;
        sum.rows_skipped += r.rows_skipped;
        sum.unknown_vendor_rows += r.unknown_vendor_rows;
        all.insert(all.end(), std::make_move_iterator(r.records.begin()),
                   std::make_move_iterator(r.records.end()));
    }
    all = dedup(std::move(all));

    // aggregate only dates on which alarms start; spill past the last such
    // date is dropped (and counted)
    std::set<Date> dates;
    for (const auto& rec : all) dates.insert(minute_to_date(rec.alarm_start));
    std::vector<CellDay> out;
    for (Date d : dates) {
        auto day = aggregate_cell_days(all, d);
        out.insert(out.end(), std::make_move_iterator(day.begin()),
                   std::make_move_iterator(day.end()));
    }
    for (const auto& rec : all) {
        Date end_date = minute_to_date(rec.alarm_start +
                                       static_cast<MinuteTime>(std::ceil(rec.duration_min)));
        if (end_date != minute_to_date(rec.alarm_start) && !dates.count(end_date))
            ++sum.spill_dropped;
    }
    if (summary) *summary = sum;
    return out;
}

void write_cell_days(const std::string& path, const std::vector<CellDay>& days) {
    csv::Table t;
    t.header = {"cell_id", "date", "vendor", "region"};
    for (int h = 1; h <= 24; ++h) t.header.push_back("inact_h" + std::to_string(h));
    for (int h = 1; h <= 24; ++h) t.header.push_back("fluct_h" + std::to_string(h));
    char buf[32];
    for (const auto& cd : days) {
        std::vector<std::string> row = {cd.cell_id, format_date(cd.date), to_string(cd.vendor),
                                        to_string(cd.region)};
        for (int h = 0; h < 24; ++h) {
            std::snprintf(buf, sizeof(buf), "%.6g", cd.hourly_inactive[h]);
            row.emplace_back(buf);
        }
        for (int h = 0; h < 24; ++h) row.push_back(std::to_string(cd.hourly_fluct[h]));
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

std::vector<CellDay> read_cell_days(const std::string& path) {
    csv::Table t = csv::read_file(path);
    std::vector<CellDay> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        if (row.size() != 4 + 48) throw std::runtime_error("malformed cell-day row in " + path);
        CellDay cd;
        cd.cell_id = row[0];
        auto date = parse_date(row[1]);
        auto vendor = parse_vendor(row[2]);
        auto region = parse_region(row[3]);
        if (!date || !vendor || !region)
            throw std::runtime_error("malformed cell-day row in " + path);
        cd.date = *date;
        cd.vendor = *vendor;
        cd.region = *region;
        for (int h = 0; h < 24; ++h) {
            auto v = parse_double_strict(row[static_cast<size_t>(4 + h)]);
            if (!v) throw std::runtime_error("malformed hourly value in " + path);
            cd.hourly_inactive[h] = *v;
            cd.total_inactive_min += *v;
        }
        for (int h = 0; h < 24; ++h) {
            cd.hourly_fluct[h] = std::stoi(row[static_cast<size_t>(28 + h)]);
            cd.total_fluct += cd.hourly_fluct[h];
        }
        out.push_back(std::move(cd));
    }
    return out;
}

} // namespace tnet::ingest
