#pragma once

#include "tnet/common.hpp"
#include "tnet/ingest.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tnet::synth {

struct SynthConfig {
    int n_cells = 120;
    int n_days = 10;
    Date start_date = make_date(2024, 1, 5); // Friday; 4 of 10 days fall on weekends
    double vendor_mix_x = 0.40;
    double vendor_mix_y = 0.35;
    double vendor_mix_z = 0.25;
    std::uint64_t seed = 42;

    // shape knobs, defaults tuned once against the distribution audit
    double weekend_multiplier = 4.3;
    double vendor_mean_inactive_x = 85.0; // overall min/day including weekends
    double vendor_mean_inactive_y = 49.0;
    double vendor_mean_inactive_z = 60.0;
    double fluct_floor_share = 0.943; // target share of floor fluctuation labels
    double cell_sigma = 1.0;          // lognormal spread across cells
    double day_sigma = 0.8;           // lognormal spread across days
    double hour_sigma = 0.6;          // lognormal spread across hours
    double spike_prob = 0.06;         // "bad day" multiplier probability
    double spike_multiplier = 6.0;

    void validate() const; // throws std::invalid_argument on bad knobs
};

// One alarm event. Events never span an hour boundary, so snapshot-file
// emission and direct aggregation produce identical cell-days.
struct AlarmEvent {
    std::string cell_id;
    Vendor vendor = Vendor::X;
    Region region = Region::A;
    MinuteTime start = 0;
    double duration_min = 0;
};

std::vector<AlarmEvent> generate_events(const SynthConfig& config);
std::vector<ingest::CellDay> events_to_cell_days(const std::vector<AlarmEvent>& events);
std::vector<ingest::CellDay> generate_cell_days(const SynthConfig& config);

// Emits alarms_YYYYMMDD_HHMM.csv snapshots every 10 minutes (plus the final
// midnight snapshot) under dir, mimicking the live export: an active alarm
// reappears in every snapshot with its duration so far, and once more with
// the full duration after it clears.
void write_snapshot_files(const SynthConfig& config, const std::string& dir);

struct DistributionAudit {
    // cell-day totals
    double inactive_median = 0, inactive_p75 = 0, inactive_p90 = 0, inactive_max = 0;
    double fluct_median = 0, fluct_p75 = 0, fluct_p90 = 0, fluct_max = 0;
    double below_floor_inactive_share = 0; // total inactive <= 15 min
    double below_floor_fluct_share = 0;    // total fluct <= 1
    double weekend_weekday_ratio = 0;      // mean total inactive ratio
    std::array<double, 24> hourly_mean_inactive{};
    int hourly_argmax_1 = 0; // 1-based hours of the two largest means
    int hourly_argmax_2 = 0;
    double label_floor_share_t3 = 0; // derived t3 == 1 across all 24 start hours
    double label_floor_share_t4 = 0;
    long n_cell_days = 0;
};

DistributionAudit distribution_audit(const std::vector<ingest::CellDay>& cell_days);
void write_audit(const std::string& path, const DistributionAudit& audit);

} // namespace tnet::synth
