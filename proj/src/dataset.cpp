#include "softsense/dataset.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "json.hpp"
#include "softsense/csv.hpp"
#include "softsense/errors.hpp"

namespace softsense {

std::vector<std::string> ProcessDataset::tags() const {
    std::vector<std::string> out;
    out.reserve(variable_meta.size());
    for (const auto& m : variable_meta) out.push_back(m.tag);
    return out;
}

static std::vector<std::string> dedupe_tags(const std::vector<std::string>& tags) {
    std::vector<std::string> out;
    out.reserve(tags.size());
    std::unordered_map<std::string, int> seen;
    for (const auto& tag : tags) {
        int& count = seen[tag];
        ++count;
        out.push_back(count == 1 ? tag : tag + "." + std::to_string(count));
    }
    return out;
}

ProcessDataset load_csv(const std::string& path, const std::vector<VariableMeta>& meta) {
    CsvTable table = read_csv(path);
    const std::size_t d = table.header.size();
    if (!meta.empty() && meta.size() != d) {
        throw ShapeError(path + ": file has " + std::to_string(d) +
                         " columns but metadata describes " + std::to_string(meta.size()));
    }

    ProcessDataset ds;
    ds.values = std::move(table.values);
    const auto tags = dedupe_tags(table.header);
    ds.variable_meta.reserve(d);
    for (std::size_t c = 0; c < d; ++c) {
        VariableMeta m;
        m.id = static_cast<int>(c + 1);
        m.tag = tags[c];
        if (!meta.empty()) {
            m.description = meta[c].description;
            m.unit = meta[c].unit;
            if (!meta[c].tag.empty()) m.tag = meta[c].tag;
        }
        ds.variable_meta.push_back(std::move(m));
    }
    return ds;
}

NormalizationStats fit_normalizer(const ProcessDataset& ds, std::size_t row_begin,
                                  std::size_t row_end) {
    if (row_begin >= row_end || row_end > ds.n_rows()) {
        throw std::runtime_error("fit_normalizer: empty or out-of-range row range [" +
                                 std::to_string(row_begin) + ", " + std::to_string(row_end) +
                                 ") for " + std::to_string(ds.n_rows()) + " rows");
    }
    const std::size_t d = ds.n_vars();
    NormalizationStats stats;
    stats.tags = ds.tags();
    stats.min.assign(d, 0.0);
    stats.max.assign(d, 0.0);
    stats.fitted_on = "rows[" + std::to_string(row_begin) + "," + std::to_string(row_end) + ")";

    std::string degenerate;
    for (std::size_t c = 0; c < d; ++c) {
        double lo = ds.values(row_begin, c);
        double hi = lo;
        for (std::size_t r = row_begin + 1; r < row_end; ++r) {
            const double v = ds.values(r, c);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        stats.min[c] = lo;
        stats.max[c] = hi;
        if (hi - lo < kDegenerateRangeEps) {
            if (!degenerate.empty()) degenerate += ", ";
            degenerate += stats.tags[c];
        }
    }
    if (!degenerate.empty()) {
        throw std::runtime_error("fit_normalizer: degenerate (constant) variables: " + degenerate);
    }
    return stats;
}

ProcessDataset apply_normalizer(const ProcessDataset& ds, const NormalizationStats& stats) {
    if (stats.n_vars() != ds.n_vars()) {
        throw ShapeError("apply_normalizer: stats describe " + std::to_string(stats.n_vars()) +
                         " variables, dataset has " + std::to_string(ds.n_vars()));
    }
    ProcessDataset out = ds;
    for (std::size_t c = 0; c < ds.n_vars(); ++c) {
        const double lo = stats.min[c];
        const double range = stats.max[c] - stats.min[c];
        for (std::size_t r = 0; r < ds.n_rows(); ++r) {
            out.values(r, c) = (ds.values(r, c) - lo) / range;
        }
    }
    return out;
}

double normalize_value(const NormalizationStats& stats, std::size_t var, double v) {
    return (v - stats.min[var]) / (stats.max[var] - stats.min[var]);
}

double denormalize_value(const NormalizationStats& stats, std::size_t var, double v) {
    return stats.min[var] + v * (stats.max[var] - stats.min[var]);
}

std::vector<WindowSample> make_windows(const ProcessDataset& ds, std::size_t target,
                                       std::size_t w) {
    const std::size_t t_rows = ds.n_rows();
    const std::size_t d = ds.n_vars();
    if (target >= d) {
        throw ShapeError("make_windows: target index " + std::to_string(target) +
                         " out of range for " + std::to_string(d) + " variables");
    }
    if (w < 1 || w >= t_rows) {
        throw std::runtime_error("make_windows: window size " + std::to_string(w) +
                                 " invalid for " + std::to_string(t_rows) + " rows (need 1 <= w < T)");
    }
    const std::size_t n = d - 1;
    std::vector<WindowSample> samples;
    samples.reserve(t_rows - w);
    for (std::size_t t = w; t < t_rows; ++t) {
        WindowSample s;
        s.x = Matrix(n, w);
        std::size_t xi = 0;
        for (std::size_t c = 0; c < d; ++c) {
            if (c == target) continue;
            for (std::size_t j = 0; j < w; ++j) s.x(xi, j) = ds.values(t - w + 1 + j, c);
            ++xi;
        }
        s.y = ds.values(t, target);
        s.t_index = t;
        samples.push_back(std::move(s));
    }
    return samples;
}

SampleSplit split_chronological(const std::vector<WindowSample>& samples,
                                const SplitFractions& fractions) {
    const double sum = fractions.train + fractions.val + fractions.test;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("split fractions must sum to 1, got " + std::to_string(sum));
    }
    if (fractions.train <= 0 || fractions.val <= 0 || fractions.test <= 0) {
        throw ConfigError("split fractions must all be positive (empty split otherwise)");
    }
    const std::size_t n = samples.size();
    const auto n_train = static_cast<std::size_t>(std::llround(fractions.train * n));
    const auto n_val = static_cast<std::size_t>(std::llround(fractions.val * n));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
        throw std::runtime_error("split_chronological: a split is empty for " +
                                 std::to_string(n) + " samples");
    }
    SampleSplit out;
    out.train.assign(samples.begin(), samples.begin() + n_train);
    out.val.assign(samples.begin() + n_train, samples.begin() + n_train + n_val);
    out.test.assign(samples.begin() + n_train + n_val, samples.end());
    return out;
}

void save_stats_json(const NormalizationStats& stats, const std::string& path) {
    nlohmann::json j;
    for (std::size_t c = 0; c < stats.n_vars(); ++c) {
        j[stats.tags[c]] = {{"min", stats.min[c]}, {"max", stats.max[c]}};
    }
    j["_fitted_on"] = stats.fitted_on;
    j["_order"] = stats.tags;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

NormalizationStats load_stats_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    NormalizationStats stats;
    stats.fitted_on = j.value("_fitted_on", "");
    for (const auto& tag : j.at("_order")) {
        const auto& entry = j.at(tag.get<std::string>());
        stats.tags.push_back(tag.get<std::string>());
        stats.min.push_back(entry.at("min").get<double>());
        stats.max.push_back(entry.at("max").get<double>());
    }
    return stats;
}

const std::vector<VariableMeta>& mfp_variable_table() {
    static const std::vector<VariableMeta> table = {
        {1, "PT312", "Air delivery pressure", "MPa"},
        {2, "PT401", "Pressure in the bottom of the riser", "MPa"},
        {3, "PT408", "Pressure in top of the riser", "MPa"},
        {4, "PT403", "Pressure in top separator", "MPa"},
        {5, "PT501", "Pressure in 3 phase separator", "MPa"},
        {6, "PT408", "Diff. pressure (PT401-PT408)", "MPa"},
        {7, "PT403", "Differential pressure over VC404", "MPa"},
        {8, "FT305", "Flow rate input air", "Sm3/s"},
        {9, "FT104", "Flow rate input water", "kg/s"},
        {10, "FT407", "Flow rate top riser", "kg/s"},
        {11, "LI405", "Level top separator", "m"},
        {12, "FT406", "Flow rate top separator output", "kg/s"},
        {13, "FT407", "Density top riser", "kg/m3"},
        {14, "FT406", "Density top separator output", "kg/m3"},
        {15, "FT104", "Density water input", "kg/m3"},
        {16, "FT407", "Temperature top riser", "degC"},
        {17, "FT406", "Temperature top separator output", "degC"},
        {18, "FT104", "Temperature water input", "degC"},
        {19, "LI504", "Level gas-liquid 3 phase separator", "%"},
        {20, "VC501", "Position of valve", "%"},
        {21, "VC302", "Position of valve VC302", "%"},
        {22, "VC101", "Position of valve VC101", "%"},
        {23, "PO1", "Water pump current", "A"},
        {24, "AUX", "Auxiliary channel", ""},
    };
    return table;
}

}  // namespace softsense
