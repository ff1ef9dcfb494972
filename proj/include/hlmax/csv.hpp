#pragma once

// Minimal CSV support: shortest round-trip floats, RFC-style quoting for
// fields containing commas or quotes, and a reader that inverts the writer.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hlmax/spaces.hpp"

namespace hlmax {

inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_quote(fields[i]);
    }
    out += '\n';
    return out;
}

inline std::vector<std::string> csv_parse_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline CsvTable csv_read(std::istream& in) {
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = csv_parse_row(line);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            table.rows.push_back(std::move(fields));
        }
    }
    return table;
}

inline CsvTable csv_read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open CSV '" + path + "'");
    return csv_read(in);
}

}  // namespace hlmax
