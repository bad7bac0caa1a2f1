#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "careless/errors.hpp"

namespace careless {

// Minimal CSV support: header row, quoted fields with doubled quotes,
// LF or CRLF line endings. Lines starting with '#' are provenance comments
// and are skipped by the reader.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;

    // 0-based column index, or npos when absent.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return npos;
    }
};

inline CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool line_has_data = false;
    bool header_done = false;
    bool line_is_comment = false;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
    };
    auto end_record = [&] {
        if (line_is_comment) {
            // rebuild the raw comment line
            std::string line;
            for (std::size_t i = 0; i < record.size(); ++i) {
                if (i) line += ',';
                line += record[i];
            }
            table.comments.push_back(line);
        } else if (!header_done) {
            table.header = record;
            header_done = true;
        } else {
            table.rows.push_back(record);
        }
        record.clear();
        line_has_data = false;
        line_is_comment = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                line_has_data = true;
                break;
            case ',':
                end_field();
                line_has_data = true;
                break;
            case '\r':
                break;
            case '\n':
                if (line_has_data || !field.empty() || !record.empty()) {
                    end_field();
                    end_record();
                }
                break;
            case '#':
                if (!line_has_data && field.empty() && record.empty()) {
                    line_is_comment = true;
                }
                field += c;
                line_has_data = true;
                break;
            default:
                field += c;
                line_has_data = true;
                break;
        }
    }
    if (line_has_data || !field.empty() || !record.empty()) {
        end_field();
        end_record();
    }
    return table;
}

inline std::string csv_escape(const std::string& s) {
    bool needs_quotes = false;
    for (char c : s) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

// Shortest round-trip formatting for doubles in CSV artifacts; integers
// print without a decimal point so re-parsing is exact and stable.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char cand[40];
        std::snprintf(cand, sizeof(cand), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(cand, "%lf", &back);
        if (back == v) return cand;
    }
    return buf;
}

}  // namespace careless
