#include "tnet/common.hpp"

#include <cstdio>
#include <stdexcept>

namespace tnet {

std::string to_string(Vendor v) {
    switch (v) {
    case Vendor::X: return "X";
    case Vendor::Y: return "Y";
    case Vendor::Z: return "Z";
    }
    throw std::logic_error("bad vendor enum");
}

std::string to_string(Region r) {
    std::string s = "REG_A";
    s[4] = static_cast<char>('A' + static_cast<int>(r));
    return s;
}

std::optional<Vendor> parse_vendor(std::string_view s) {
    if (s == "X") return Vendor::X;
    if (s == "Y") return Vendor::Y;
    if (s == "Z") return Vendor::Z;
    return std::nullopt;
}

std::optional<Region> parse_region(std::string_view s) {
    if (s.size() == 5 && s.substr(0, 4) == "REG_" && s[4] >= 'A' && s[4] <= 'I')
        return static_cast<Region>(s[4] - 'A');
    return std::nullopt;
}

Date make_date(int year, unsigned month, unsigned day) {
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
    return sys_days{ymd};
}

std::optional<Date> parse_date(std::string_view s) {
    int y = 0;
    unsigned mo = 0, d = 0;
    if (std::sscanf(std::string(s).c_str(), "%d-%u-%u", &y, &mo, &d) != 3) return std::nullopt;
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd};
}

std::string format_date(Date d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

std::optional<MinuteTime> parse_minute(std::string_view s) {
    int y = 0;
    unsigned mo = 0, d = 0, hh = 0, mm = 0;
    if (std::sscanf(std::string(s).c_str(), "%d-%u-%u %u:%u", &y, &mo, &d, &hh, &mm) != 5)
        return std::nullopt;
    if (hh > 23 || mm > 59) return std::nullopt;
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return date_to_minute(sys_days{ymd}) + hh * 60 + mm;
}

std::string format_minute(MinuteTime m) {
    Date d = minute_to_date(m);
    MinuteTime rem = m - date_to_minute(d);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%s %02d:%02d", format_date(d).c_str(), int(rem / 60),
                  int(rem % 60));
    return buf;
}

MinuteTime date_to_minute(Date d) {
    return static_cast<MinuteTime>(d.time_since_epoch().count()) * 1440;
}

Date minute_to_date(MinuteTime m) {
    // floor division; alarm data never predates the epoch but keep it correct anyway
    MinuteTime days = m >= 0 ? m / 1440 : (m - 1439) / 1440;
    return Date{std::chrono::days{days}};
}

int day_of_week(Date d) {
    std::chrono::weekday wd{d};
    return static_cast<int>(wd.iso_encoding()) - 1; // iso: Mon=1..Sun=7
}

bool is_weekend(Date d) {
    int dow = day_of_week(d);
    return dow >= 5;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace tnet
