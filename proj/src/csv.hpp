#pragma once

// Minimal CSV reader for the small market-data files: comma separated, one
// header row, '#' comment lines, no quoting.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "cva/errors.hpp"

namespace cva::detail {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;  // without the leading '#'
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.emplace_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw MissingFile("cannot open " + path.string());
    }
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty()) {
            continue;
        }
        if (t.front() == '#') {
            table.comments.emplace_back(trim(t.substr(1)));
            continue;
        }
        auto fields = split(t);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw MalformedInput(path.string() + ": wrong field count in row '" +
                                 std::string(t) + "'");
        }
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) {
        throw MalformedInput(path.string() + ": missing header");
    }
    return table;
}

inline void expect_header(const CsvTable& table, const std::vector<std::string>& expected,
                          const std::filesystem::path& path) {
    if (table.header != expected) {
        std::string want;
        for (const auto& h : expected) {
            want += (want.empty() ? "" : ",") + h;
        }
        throw MalformedInput(path.string() + ": expected header '" + want + "'");
    }
}

inline double to_double(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw MalformedInput("not a number: '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace cva::detail
