#pragma once

#include <string>
#include <vector>

#include "softsense/matrix.hpp"

namespace softsense {

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;
};

// One header row of names, comma-separated decimal reals below. Every cell
// must parse fully as a real; errors name the offending data row and column.
CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& values);

// Round-trip exact formatting (value == strtod(format_double(value))).
std::string format_double(double v);

std::vector<std::string> split_fields(const std::string& line);

}  // namespace softsense
