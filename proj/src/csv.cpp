#include "softsense/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "softsense/errors.hpp"

namespace softsense {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

static bool parse_real(const std::string& cell, double& out) {
    const std::string t = trim(cell);
    if (t.empty()) return false;
    const char* begin = t.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + t.size();
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file (no header row): " + path);
    CsvTable table;
    for (auto& tag : split_fields(line)) table.header.push_back(trim(tag));
    const std::size_t n_cols = table.header.size();
    if (n_cols == 0) throw IoError("header row has no columns: " + path);

    std::vector<double> cells;
    std::size_t n_rows = 0;
    std::size_t row_number = 0;  // 1-based data row, header excluded
    while (std::getline(in, line)) {
        ++row_number;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != n_cols) {
            throw ShapeError(path + ": row " + std::to_string(row_number) + " has " +
                             std::to_string(fields.size()) + " columns, expected " +
                             std::to_string(n_cols));
        }
        for (std::size_t c = 0; c < n_cols; ++c) {
            double v = 0.0;
            if (!parse_real(fields[c], v)) {
                throw std::runtime_error(path + ": unparseable cell at row " +
                                         std::to_string(row_number) + ", column " +
                                         std::to_string(c + 1) + " (" + table.header[c] +
                                         "): '" + trim(fields[c]) + "'");
            }
            cells.push_back(v);
        }
        ++n_rows;
    }
    if (n_rows == 0) throw std::runtime_error(path + ": zero data rows (header only)");

    table.values = Matrix(n_rows, n_cols);
    std::copy(cells.begin(), cells.end(), table.values.data());
    return table;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& values) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out << ',';
        out << header[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < values.rows(); ++r) {
        for (std::size_t c = 0; c < values.cols(); ++c) {
            if (c) out << ',';
            out << format_double(values(r, c));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace softsense
