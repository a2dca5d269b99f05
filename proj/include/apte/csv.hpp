// Minimal CSV support: header row, comma-separated, no quoting, empty cell
// means missing. Enough for the daily/weekly/period/report schemas and kept
// byte-deterministic on the writing side for golden-file comparisons.
#ifndef APTE_CSV_HPP
#define APTE_CSV_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "apte/errors.hpp"

namespace apte::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    if (out.empty()) out.emplace_back(trim(line));
    return out;
}

inline Table read_stream(std::istream& in, const std::string& origin) {
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw DataError(origin + ": empty input");
    t.header = split_line(line);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        t.rows.push_back(split_line(line));
    }
    return t;
}

inline Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_stream(in, path);
}

/// Fixed-precision decimal formatting (C locale semantics, deterministic).
inline std::string format(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

/// Shortest round-trip formatting for full-precision output.
inline std::string format_full(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace apte::csv

#endif
