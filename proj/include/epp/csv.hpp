#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace epp {

inline std::string fmt_g12(double v) {
    if (v == 0.0) return "0";  // avoid "-0"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string fmt_int(long long v) { return std::to_string(v); }

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) {
        if (row.size() != header.size()) throw std::logic_error("CsvTable: row width mismatch");
        rows.push_back(std::move(row));
    }

    std::string to_string() const {
        std::string out;
        auto emit = [&out](const std::vector<std::string>& r) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) out += ',';
                out += r[i];
            }
            out += '\n';
        };
        emit(header);
        for (const auto& r : rows) emit(r);
        return out;
    }
};

}  // namespace epp
