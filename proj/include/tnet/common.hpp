#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tnet {

enum class Vendor { X, Y, Z };
enum class Region { A, B, C, D, E, F, G, H, I };

inline constexpr int kNumVendors = 3;
inline constexpr int kNumRegions = 9;

std::string to_string(Vendor v);
std::string to_string(Region r);
std::optional<Vendor> parse_vendor(std::string_view s);
std::optional<Region> parse_region(std::string_view s);

// Calendar dates are days since the Unix epoch; timestamps are minutes
// since the epoch. Both stay integral so they sort and hash trivially.
using Date = std::chrono::sys_days;
using MinuteTime = std::int64_t;

Date make_date(int year, unsigned month, unsigned day);
std::optional<Date> parse_date(std::string_view s);        // YYYY-MM-DD
std::string format_date(Date d);
std::optional<MinuteTime> parse_minute(std::string_view s); // YYYY-MM-DD HH:MM
std::string format_minute(MinuteTime m);

MinuteTime date_to_minute(Date d);
Date minute_to_date(MinuteTime m);

int day_of_week(Date d); // 0 = Monday .. 6 = Sunday
bool is_weekend(Date d);

// FNV-1a over raw bytes; used for input hashing in run manifests and for
// the seeded cell split in the label holdout check.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);

} // namespace tnet
