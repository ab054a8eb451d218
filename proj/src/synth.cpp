#include "tnet/synth.hpp"

#include "tnet/csv.hpp"
#include "tnet/labels.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

namespace tnet::synth {

namespace {

// diurnal weights, peaks at hours 9 and 24, near-silent 12-18
constexpr double kHourWeight[24] = {
    1.2, 1.0, 0.8, 0.8, 1.0,  1.4,            // 1-6 night
    2.2, 4.5, 8.0, 4.8, 2.4,                  // 7-11 morning, peak at 9
    0.18, 0.18, 0.18, 0.18, 0.18, 0.18, 0.18, // 12-18 quiet
    1.2, 1.8, 2.6, 3.6, 5.2, 9.4};            // 19-24 evening, peak at 24

// where flapping bursts land; peak at hour 10
constexpr double kFluctWeight[24] = {0.6, 0.5, 0.4, 0.4, 0.5, 0.8, 1.5, 3.0, 4.0, 5.0, 3.0, 1.5,
                                     0.4, 0.4, 0.4, 0.4, 0.4, 0.6, 1.0, 1.4, 1.8, 2.2, 2.6, 3.2};

// spans roughly the reported 36..113 min/day regional range
constexpr double kRegionFactor[kNumRegions] = {1.00, 0.85, 1.20, 1.74, 0.95,
                                               1.10, 0.55, 0.78, 1.30};

double lognormal(std::mt19937_64& rng, double sigma) {
    std::normal_distribution<double> dist(-0.5 * sigma * sigma, sigma);
    return std::exp(dist(rng));
}

} // namespace

void SynthConfig::validate() const {
    if (n_cells <= 0 || n_days <= 0)
        throw std::invalid_argument("synth: n_cells and n_days must be positive");
    if (std::abs(vendor_mix_x + vendor_mix_y + vendor_mix_z - 1.0) > 1e-9)
        throw std::invalid_argument("synth: vendor mix must sum to 1");
    if (weekend_multiplier <= 0 || vendor_mean_inactive_x <= 0 || vendor_mean_inactive_y <= 0 ||
        vendor_mean_inactive_z <= 0)
        throw std::invalid_argument("synth: shape knobs must be positive");
    if (!(fluct_floor_share > 0.0 && fluct_floor_share < 1.0))
        throw std::invalid_argument("synth: fluct_floor_share must lie in (0,1)");
}

std::vector<AlarmEvent> generate_events(const SynthConfig& config) {
    config.validate();

    double weight_sum = 0;
    for (double w : kHourWeight) weight_sum += w;
    double fluct_sum = 0;
    for (double w : kFluctWeight) fluct_sum += w;

    // weekday base level such that the overall mean (weekends included)
    // lands on the configured vendor mean given this window's weekend share
    int weekend_days = 0;
    for (int d = 0; d < config.n_days; ++d)
        if (is_weekend(config.start_date + std::chrono::days{d})) ++weekend_days;
    double f = static_cast<double>(weekend_days) / config.n_days;
    double mean_scale = 1.0 - f + f * config.weekend_multiplier;

    // a flapping burst marks 8 of the 24 window starts above floor
    double flap_day_prob = std::min(1.0, 3.0 * (1.0 - config.fluct_floor_share));

    std::vector<AlarmEvent> events;
    for (int c = 0; c < config.n_cells; ++c) {
        double u = (c + 0.5) / config.n_cells;
        Vendor vendor = u < config.vendor_mix_x                        ? Vendor::X
                        : u < config.vendor_mix_x + config.vendor_mix_y ? Vendor::Y
                                                                        : Vendor::Z;
        double vendor_mean = vendor == Vendor::X   ? config.vendor_mean_inactive_x
                             : vendor == Vendor::Y ? config.vendor_mean_inactive_y
                                                   : config.vendor_mean_inactive_z;
        char id[16];
        std::snprintf(id, sizeof(id), "N%s_%04d", to_string(vendor).c_str(), c % 10000);
        std::string cell_id = id;

        std::mt19937_64 rng(config.seed ^ fnv1a(cell_id));
        Region region = static_cast<Region>(rng() % kNumRegions);
        double cell_factor = lognormal(rng, config.cell_sigma);
        double base = vendor_mean / mean_scale * kRegionFactor[static_cast<int>(region)] *
                      cell_factor;

        for (int d = 0; d < config.n_days; ++d) {
            Date date = config.start_date + std::chrono::days{d};
            MinuteTime day_begin = date_to_minute(date);
            double total = base * lognormal(rng, config.day_sigma);
            if (is_weekend(date)) total *= config.weekend_multiplier;
            if (std::uniform_real_distribution<double>(0, 1)(rng) < config.spike_prob)
                total *= config.spike_multiplier;

            int burst_hour = -1;
            if (std::uniform_real_distribution<double>(0, 1)(rng) < flap_day_prob) {
                double pick = std::uniform_real_distribution<double>(0, fluct_sum)(rng);
                double acc = 0;
                for (int h = 0; h < 24; ++h) {
                    acc += kFluctWeight[h];
                    if (pick <= acc) {
                        burst_hour = h;
                        break;
                    }
                }
            }

            for (int h = 0; h < 24; ++h) {
                if (h == burst_hour) {
                    // flapping: several very short outages in one hour
                    int flaps = 4 + static_cast<int>(rng() % 3);
                    int minute0 = static_cast<int>(rng() % (60 - 2 * flaps));
                    for (int i = 0; i < flaps; ++i) {
                        AlarmEvent ev;
                        ev.cell_id = cell_id;
                        ev.vendor = vendor;
                        ev.region = region;
                        ev.start = day_begin + h * 60 + minute0 + 2 * i;
                        ev.duration_min =
                            0.4 + std::uniform_real_distribution<double>(0, 1)(rng);
                        events.push_back(std::move(ev));
                    }
                    continue;
                }
                double minutes = total * kHourWeight[h] / weight_sum *
                                 lognormal(rng, config.hour_sigma);
                minutes = std::min(minutes, 59.0);
                if (minutes < 0.25) continue;
                int latest = 60 - static_cast<int>(std::ceil(minutes));
                int minute0 = latest > 0 ? static_cast<int>(rng() % (latest + 1)) : 0;
                AlarmEvent ev;
                ev.cell_id = cell_id;
                ev.vendor = vendor;
                ev.region = region;
                ev.start = day_begin + h * 60 + minute0;
                ev.duration_min = minutes;
                events.push_back(std::move(ev));
            }
        }
    }
    std::sort(events.begin(), events.end(), [](const AlarmEvent& a, const AlarmEvent& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.cell_id < b.cell_id;
    });
    return events;
}

std::vector<ingest::CellDay> events_to_cell_days(const std::vector<AlarmEvent>& events) {
    std::map<Date, std::vector<ingest::AlarmRecord>> by_date;
    for (const auto& ev : events) {
        ingest::AlarmRecord rec;
        rec.cell_id = ev.cell_id;
        rec.vendor = ev.vendor;
        rec.region = ev.region;
        rec.alarm_start = ev.start;
        rec.duration_min = ev.duration_min;
        rec.snapshot_time = ev.start + static_cast<MinuteTime>(std::ceil(ev.duration_min));
        rec.source_file = "synthetic";
        by_date[minute_to_date(ev.start)].push_back(std::move(rec));
    }
    std::vector<ingest::CellDay> out;
    for (const auto& [date, recs] : by_date) {
        auto day = ingest::aggregate_cell_days(recs, date);
        out.insert(out.end(), std::make_move_iterator(day.begin()),
                   std::make_move_iterator(day.end()));
    }
    return out;
}

std::vector<ingest::CellDay> generate_cell_days(const SynthConfig& config) {
    return events_to_cell_days(generate_events(config));
}

void write_snapshot_files(const SynthConfig& config, const std::string& dir) {
    auto events = generate_events(config);
    std::filesystem::create_directories(dir);

    MinuteTime first = date_to_minute(config.start_date);
    MinuteTime last = first + static_cast<MinuteTime>(config.n_days) * 1440; // inclusive final file
    long snapshot_id = 0;
    for (MinuteTime t = first; t <= last; t += 10) {
        std::vector<const AlarmEvent*> active, cleared;
        for (const auto& ev : events) {
            double end = static_cast<double>(ev.start) + ev.duration_min;
            if (static_cast<double>(t) >= ev.start && static_cast<double>(t) < end)
                active.push_back(&ev);
            else if (static_cast<double>(t) >= end && static_cast<double>(t - 10) < end)
                cleared.push_back(&ev); // first snapshot after clearing carries the full duration
        }
        csv::Table table;
        table.header = ingest::kSnapshotHeader;
        auto emit = [&](const AlarmEvent& ev, double reported_duration) {
            std::vector<std::string> row(8);
            row[0] = std::to_string(++snapshot_id);
            row[1] = to_string(ev.vendor);
            row[2] = to_string(ev.region);
            char buf[64];
            switch (ev.vendor) {
            case Vendor::X:
                row[3] = "OSSX-" + ev.cell_id;
                row[4] = "CELL=" + ev.cell_id + ";SEV=MAJ";
                row[5] = "";
                break;
            case Vendor::Y:
                // the cell id must sit exactly at characters [8,15)
                row[3] = "BSSY-01-" + ev.cell_id + "-SITE01";
                row[4] = "";
                row[5] = "";
                break;
            case Vendor::Z:
                row[3] = "OSSZ-" + ev.cell_id;
                row[4] = "";
                row[5] = "{\"cell_name\":\"" + ev.cell_id + "\",\"code\":41}";
                break;
            }
            row[6] = format_minute(ev.start);
            std::snprintf(buf, sizeof(buf), "%.10g", reported_duration);
            row[7] = buf;
            table.rows.push_back(std::move(row));
        };
        for (const auto* ev : active)
            emit(*ev, std::min(static_cast<double>(t - ev->start), ev->duration_min));
        for (const auto* ev : cleared) emit(*ev, ev->duration_min);

        Date d = minute_to_date(t);
        std::chrono::year_month_day ymd{d};
        MinuteTime rem = t - date_to_minute(d);
        char name[48];
        std::snprintf(name, sizeof(name), "alarms_%04d%02u%02u_%02d%02d.csv", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()), int(rem / 60), int(rem % 60));
        csv::write_file(dir + "/" + name, table);
    }
}

DistributionAudit distribution_audit(const std::vector<ingest::CellDay>& cell_days) {
    if (cell_days.empty()) throw std::invalid_argument("distribution_audit: empty input");
    DistributionAudit a;
    a.n_cell_days = static_cast<long>(cell_days.size());

    std::vector<double> inact, fluct;
    inact.reserve(cell_days.size());
    fluct.reserve(cell_days.size());
    double weekend_sum = 0, weekday_sum = 0;
    long weekend_n = 0, weekday_n = 0;
    long floor_t3 = 0, floor_t4 = 0, label_n = 0;
    for (const auto& cd : cell_days) {
        inact.push_back(cd.total_inactive_min);
        fluct.push_back(static_cast<double>(cd.total_fluct));
        if (cd.total_inactive_min <= 15.0) a.below_floor_inactive_share += 1;
        if (cd.total_fluct <= 1) a.below_floor_fluct_share += 1;
        if (is_weekend(cd.date)) {
            weekend_sum += cd.total_inactive_min;
            ++weekend_n;
        } else {
            weekday_sum += cd.total_inactive_min;
            ++weekday_n;
        }
        for (int h = 0; h < 24; ++h) a.hourly_mean_inactive[static_cast<size_t>(h)] +=
            cd.hourly_inactive[static_cast<size_t>(h)];
        for (int s = 1; s <= 24; ++s) {
            auto l = labels::derive_labels(cd.hourly_inactive, cd.hourly_fluct, s);
            if (l.t3_fluct == 1.0) ++floor_t3;
            if (l.t4_hour_fluct == 1.0) ++floor_t4;
            ++label_n;
        }
    }
    double n = static_cast<double>(cell_days.size());
    a.below_floor_inactive_share /= n;
    a.below_floor_fluct_share /= n;
    for (auto& v : a.hourly_mean_inactive) v /= n;
    a.label_floor_share_t3 = static_cast<double>(floor_t3) / static_cast<double>(label_n);
    a.label_floor_share_t4 = static_cast<double>(floor_t4) / static_cast<double>(label_n);

    a.inactive_median = labels::percentile_linear(inact, 0.50);
    a.inactive_p75 = labels::percentile_linear(inact, 0.75);
    a.inactive_p90 = labels::percentile_linear(inact, 0.90);
    a.inactive_max = *std::max_element(inact.begin(), inact.end());
    a.fluct_median = labels::percentile_linear(fluct, 0.50);
    a.fluct_p75 = labels::percentile_linear(fluct, 0.75);
    a.fluct_p90 = labels::percentile_linear(fluct, 0.90);
    a.fluct_max = *std::max_element(fluct.begin(), fluct.end());
    if (weekday_n > 0 && weekend_n > 0 && weekday_sum > 0)
        a.weekend_weekday_ratio =
            (weekend_sum / weekend_n) / (weekday_sum / weekday_n);

    int best = 0, second = 1;
    for (int h = 1; h < 24; ++h) {
        if (a.hourly_mean_inactive[static_cast<size_t>(h)] >
            a.hourly_mean_inactive[static_cast<size_t>(best)]) {
            second = best;
            best = h;
        } else if (h != best && a.hourly_mean_inactive[static_cast<size_t>(h)] >
                                    a.hourly_mean_inactive[static_cast<size_t>(second)]) {
            second = h;
        }
    }
    a.hourly_argmax_1 = best + 1;
    a.hourly_argmax_2 = second + 1;
    return a;
}

void write_audit(const std::string& path, const DistributionAudit& a) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    char buf[128];
    auto line = [&](const char* name, double v) {
        std::snprintf(buf, sizeof(buf), "%s,%.6g\n", name, v);
        out << buf;
    };
    out << "statistic,value\n";
    line("inactive_median", a.inactive_median);
    line("inactive_p75", a.inactive_p75);
    line("inactive_p90", a.inactive_p90);
    line("inactive_max", a.inactive_max);
    line("fluct_median", a.fluct_median);
    line("fluct_p75", a.fluct_p75);
    line("fluct_p90", a.fluct_p90);
    line("fluct_max", a.fluct_max);
    line("below_floor_inactive_share", a.below_floor_inactive_share);
    line("below_floor_fluct_share", a.below_floor_fluct_share);
    line("weekend_weekday_ratio", a.weekend_weekday_ratio);
    line("label_floor_share_t3", a.label_floor_share_t3);
    line("label_floor_share_t4", a.label_floor_share_t4);
    line("hourly_argmax_1", a.hourly_argmax_1);
    line("hourly_argmax_2", a.hourly_argmax_2);
    for (int h = 0; h < 24; ++h) {
        std::snprintf(buf, sizeof(buf), "hourly_mean_h%d,%.6g\n", h + 1,
                      a.hourly_mean_inactive[static_cast<size_t>(h)]);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "n_cell_days,%ld\n", a.n_cell_days);
    out << buf;
}

} // namespace tnet::synth
