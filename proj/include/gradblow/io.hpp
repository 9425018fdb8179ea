// Plain-text serialization: CSV with a fixed header line and floats printed
// with 17 significant digits, enough to round-trip an IEEE double exactly.
// Reports stay diff-able across runs because nothing here depends on locale,
// wall clock, or pointer values.

#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace gradblow {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string csv_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

inline std::string csv_row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double x : cells) s.push_back(fmt17(x));
    return csv_row(s);
}

class CsvFile {
public:
    CsvFile(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw config_error("cannot open for writing: " + path);
        out_ << csv_row(header);
    }
    void row(const std::vector<double>& cells) { out_ << csv_row(cells); }
    void row(const std::vector<std::string>& cells) { out_ << csv_row(cells); }

private:
    std::ofstream out_;
};

// FNV-1a over a string; used to stamp configs into sidecar metadata.
inline std::string content_hash(const std::string& s) {
    unsigned long long h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

} // namespace gradblow
