#include "softsense/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "softsense/csv.hpp"
#include "softsense/errors.hpp"
#include "softsense/graph.hpp"
#include "softsense/model.hpp"

namespace softsense {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ShapeError("pearson: need two equal-length series of >= 2 points");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) throw std::runtime_error("pearson: constant series");
    return sxy / std::sqrt(sxx * syy);
}

Matrix data_correlation(const ProcessDataset& ds, const std::vector<std::size_t>& input_vars,
                        std::size_t row_begin, std::size_t row_end) {
    if (row_begin >= row_end || row_end > ds.n_rows()) {
        throw std::runtime_error("data_correlation: empty or out-of-range row range");
    }
    const std::size_t n = input_vars.size();
    const std::size_t rows = row_end - row_begin;
    std::vector<Vec> series(n, Vec(rows));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = input_vars[i];
        for (std::size_t r = 0; r < rows; ++r) series[i][r] = ds.values(row_begin + r, c);
        const auto [lo, hi] = std::minmax_element(series[i].begin(), series[i].end());
        if (*hi - *lo < kDegenerateRangeEps) {
            throw std::runtime_error("data_correlation: variable '" +
                                     ds.variable_meta[c].tag + "' is constant on these rows");
        }
    }
    Matrix corr(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        corr(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double c = pearson(series[i], series[j]);
            corr(i, j) = c;
            corr(j, i) = c;
        }
    }
    return corr;
}

Matrix embedding_correlation(const Matrix& z) {
    const std::size_t n = z.rows();
    for (std::size_t i = 0; i < n; ++i) {
        auto row = z.row(i);
        const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
        if (*hi - *lo < kDegenerateRangeEps) {
            throw std::runtime_error("embedding_correlation: embedding row " + std::to_string(i) +
                                     " is constant");
        }
    }
    Matrix corr(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        corr(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double c = pearson(z.row(i), z.row(j));
            corr(i, j) = c;
            corr(j, i) = c;
        }
    }
    return corr;
}

Matrix attention_matrix(const Checkpoint& ckpt, const std::vector<WindowSample>& samples,
                        std::size_t threads) {
    if (samples.empty()) throw std::runtime_error("attention_matrix: no samples");
    const Adjacency adj = graph_for(ckpt.z, ckpt.config.k, ckpt.config.symmetric_graph);
    const std::size_t n = ckpt.z.rows();

    // per-worker partial sums reduced in worker order
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, samples.size()));
    std::vector<Matrix> partial(workers, Matrix(n, n, 0.0));
    auto run = [&](std::size_t worker, std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            const ForwardTrace tr = forward(ckpt.z, samples[s].x, ckpt.params, adj, 0.0, false);
            Matrix& acc = partial[worker];
            for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += tr.alpha.data()[i];
        }
    };
    if (workers == 1) {
        run(0, 0, samples.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (samples.size() + workers - 1) / workers;
        for (std::size_t t = 0; t < workers; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(samples.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(run, t, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    Matrix avg = std::move(partial[0]);
    for (std::size_t t = 1; t < workers; ++t) {
        for (std::size_t i = 0; i < avg.size(); ++i) avg.data()[i] += partial[t].data()[i];
    }
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (std::size_t i = 0; i < avg.size(); ++i) avg.data()[i] *= inv;

    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) row_sum += avg(i, j);
        if (std::abs(row_sum - 1.0) > 1e-6) {
            throw std::runtime_error("attention_matrix: row " + std::to_string(i) +
                                     " sums to " + std::to_string(row_sum) + ", expected 1");
        }
    }
    return avg;
}

DiscoveryBundle make_bundle(const Checkpoint& ckpt, const ProcessDataset& raw,
                            const std::vector<WindowSample>& samples, std::size_t threads) {
    DiscoveryBundle bundle;
    std::vector<std::size_t> input_vars;
    for (std::size_t c = 0; c < raw.n_vars(); ++c) {
        if (c != ckpt.target_index) {
            input_vars.push_back(c);
            bundle.sensor_tags.push_back(raw.variable_meta[c].tag);
        }
    }
    const std::size_t w = ckpt.config.window;
    const std::size_t row_begin = samples.front().t_index + 1 - w;
    const std::size_t row_end = samples.back().t_index + 1;
    bundle.data_corr = data_correlation(raw, input_vars, row_begin, row_end);
    bundle.embed_corr = embedding_correlation(ckpt.z);
    bundle.attention_avg = attention_matrix(ckpt, samples, threads);
    return bundle;
}

namespace {

void write_labeled_matrix(const std::string& path, const std::vector<std::string>& tags,
                          const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    out << "sensor";
    for (const auto& tag : tags) out << ',' << tag;
    out << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out << tags[r];
        for (std::size_t c = 0; c < m.cols(); ++c) out << ',' << format_double(m(r, c));
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void export_bundle(const DiscoveryBundle& bundle, const std::string& dir,
                   const std::string& target_tag, const std::string& checkpoint_id,
                   const std::string& sample_range) {
    namespace fs = std::filesystem;
    const fs::path base(dir);

    const std::vector<std::pair<std::string, const Matrix*>> parts = {
        {target_tag + "_data.csv", &bundle.data_corr},
        {target_tag + "_embed.csv", &bundle.embed_corr},
        {target_tag + "_attn.csv", &bundle.attention_avg},
    };

    // Stage to temp names, then rename; a failed export leaves nothing behind.
    std::vector<fs::path> staged;
    auto cleanup = [&staged]() {
        std::error_code ec;
        for (const auto& p : staged) fs::remove(p, ec);
    };
    try {
        for (const auto& [name, matrix] : parts) {
            const fs::path tmp = base / (name + ".tmp");
            write_labeled_matrix(tmp.string(), bundle.sensor_tags, *matrix);
            staged.push_back(tmp);
        }
        nlohmann::json manifest;
        manifest["target_tag"] = target_tag;
        manifest["checkpoint_id"] = checkpoint_id;
        manifest["sample_range"] = sample_range;
        manifest["sensor_tags"] = bundle.sensor_tags;
        manifest["attention"] = "averaged over evaluation windows, dropout off";
        manifest["files"] = {parts[0].first, parts[1].first, parts[2].first};
        const fs::path manifest_tmp = base / "manifest.json.tmp";
        {
            std::ofstream out(manifest_tmp);
            if (!out) throw IoError("cannot write file: " + manifest_tmp.string());
            out << manifest.dump(2) << '\n';
            if (!out) throw IoError("write failed: " + manifest_tmp.string());
        }
        staged.push_back(manifest_tmp);
    } catch (...) {
        cleanup();
        throw;
    }

    for (const auto& tmp : staged) {
        fs::path final_path = tmp;
        final_path.replace_extension();  // strips the trailing .tmp
        std::error_code ec;
        fs::rename(tmp, final_path, ec);
        if (ec) {
            cleanup();
            throw IoError("cannot finalize " + final_path.string() + ": " + ec.message());
        }
    }
}

}  // namespace softsense
