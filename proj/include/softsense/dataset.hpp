#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "softsense/matrix.hpp"

namespace softsense {

struct VariableMeta {
    int id = 0;  // 1-based column number
    std::string tag;
    std::string description;
    std::string unit;
};

// T x D matrix of sensor readings, rows in time order, no missing entries.
struct ProcessDataset {
    Matrix values;
    std::vector<VariableMeta> variable_meta;
    double sample_rate_hz = 1.0;

    std::size_t n_rows() const { return values.rows(); }
    std::size_t n_vars() const { return values.cols(); }
    std::vector<std::string> tags() const;
};

struct NormalizationStats {
    std::vector<std::string> tags;
    Vec min;
    Vec max;
    std::string fitted_on;

    std::size_t n_vars() const { return tags.size(); }
};

inline constexpr double kDegenerateRangeEps = 1e-12;

// One supervised sample: N x w input window (target variable's row removed)
// and the scalar target read at the window's end time.
struct WindowSample {
    Matrix x;             // N x w, N = D-1
    double y = 0.0;
    std::size_t t_index = 0;  // row index of the window's last timestep
};

struct SplitFractions {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;

    bool operator==(const SplitFractions& o) const = default;
};

struct SampleSplit {
    std::vector<WindowSample> train;
    std::vector<WindowSample> val;
    std::vector<WindowSample> test;
};

// Loads a CSV with one header row of variable tags. Duplicate header tags are
// made unique by appending ".2", ".3", ... in order of appearance. When meta
// is given its length must match the column count; its tags/descriptions win.
ProcessDataset load_csv(const std::string& path,
                        const std::vector<VariableMeta>& meta = {});

// Per-variable min/max over rows [row_begin, row_end). Errors on an empty
// range and on near-constant variables (range below kDegenerateRangeEps).
NormalizationStats fit_normalizer(const ProcessDataset& ds, std::size_t row_begin,
                                  std::size_t row_end);

// Maps each value to (v - min) / (max - min). Values outside the fitted range
// map outside [0, 1]; no clipping.
ProcessDataset apply_normalizer(const ProcessDataset& ds, const NormalizationStats& stats);

double normalize_value(const NormalizationStats& stats, std::size_t var, double v);
double denormalize_value(const NormalizationStats& stats, std::size_t var, double v);

// Sliding windows of length w: one sample per end time t = w .. T-1, inputs
// from rows t-w+1 .. t with the target variable's row excluded, label from
// the target column at row t. Exactly T - w samples.
std::vector<WindowSample> make_windows(const ProcessDataset& ds, std::size_t target,
                                       std::size_t w);

// Contiguous time-ordered split; fractions must be positive and sum to 1.
SampleSplit split_chronological(const std::vector<WindowSample>& samples,
                                const SplitFractions& fractions);

// {variable_tag: {min, max}} plus a "_fitted_on" entry.
void save_stats_json(const NormalizationStats& stats, const std::string& path);
NormalizationStats load_stats_json(const std::string& path);

// Built-in variable table for the 24-variable multiphase-flow benchmark
// layout (1 Hz, six key variables at positions 5/8/15/16/19/20).
const std::vector<VariableMeta>& mfp_variable_table();

}  // namespace softsense
