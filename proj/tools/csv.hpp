#pragma once

#include <string>
#include <vector>

namespace waveqed::cli {

// Minimal CSV table: one header row, numeric cells. Doubles are written
// with %.17g so files are bit-reproducible and round-trip exactly.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

std::string format_cell(double v);

} // namespace waveqed::cli
