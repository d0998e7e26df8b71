#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "softsense/matrix.hpp"

namespace test {

// Scratch directory, removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& label) {
        static std::mt19937_64 gen(std::random_device{}());
        path = std::filesystem::temp_directory_path() /
               (label + "-" + std::to_string(gen()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline double max_abs_diff(const softsense::Matrix& a, const softsense::Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    }
    return m;
}

}  // namespace test
