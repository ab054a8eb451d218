#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tnet::csv {

// Minimal RFC-4180 style CSV handling. Fields containing commas, quotes or
// newlines are double-quoted on write; embedded quotes are doubled.
std::vector<std::string> split_line(std::string_view line);
std::string join_line(const std::vector<std::string>& fields);
std::string quote_field(std::string_view field);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::string_view name) const; // -1 when absent
};

Table read_file(const std::string& path);
void write_file(const std::string& path, const Table& table);

} // namespace tnet::csv
