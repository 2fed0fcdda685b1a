#include "csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "waveqed/errors.hpp"

namespace waveqed::cli {

std::string format_cell(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out << ',';
        out << table.columns[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw DimensionError(path + ": row width does not match the header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_cell(row[c]);
        }
        out << '\n';
    }
    if (!out) throw ConfigError("write failed on " + path);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.push_back(cell);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            const char* begin = cell.c_str();
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end != begin + cell.size())
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": not a number: '" + cell + "'");
            row.push_back(v);
        }
        if (row.size() != table.columns.size())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": row width " +
                              std::to_string(row.size()) + " != header width " +
                              std::to_string(table.columns.size()));
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace waveqed::cli
