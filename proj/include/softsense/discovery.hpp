#pragma once

#include <span>
#include <string>
#include <vector>

#include "softsense/checkpoint.hpp"
#include "softsense/dataset.hpp"
#include "softsense/matrix.hpp"

namespace softsense {

// The three interpretability matrices over the N input sensors: Pearson
// correlation of the raw series, Pearson correlation of the learned
// embeddings, and attention averaged over evaluation windows.
struct DiscoveryBundle {
    Matrix data_corr;
    Matrix embed_corr;
    Matrix attention_avg;
    std::vector<std::string> sensor_tags;
};

double pearson(std::span<const double> x, std::span<const double> y);

// Pairwise Pearson correlation of the raw sensor series over rows
// [row_begin, row_end). Errors on a constant variable, naming it.
Matrix data_correlation(const ProcessDataset& ds, const std::vector<std::size_t>& input_vars,
                        std::size_t row_begin, std::size_t row_end);

// Pairwise Pearson correlation between embedding rows.
Matrix embedding_correlation(const Matrix& z);

// Attention probabilities averaged over all given windows, dropout off.
// Rows stay stochastic over the adjacency support plus the diagonal.
Matrix attention_matrix(const Checkpoint& ckpt, const std::vector<WindowSample>& samples,
                        std::size_t threads = 1);

DiscoveryBundle make_bundle(const Checkpoint& ckpt, const ProcessDataset& raw,
                            const std::vector<WindowSample>& samples, std::size_t threads = 1);

// Writes {target}_data.csv, {target}_embed.csv, {target}_attn.csv (tag-labeled
// rows and columns) plus manifest.json. All files appear atomically or not at
// all.
void export_bundle(const DiscoveryBundle& bundle, const std::string& dir,
                   const std::string& target_tag, const std::string& checkpoint_id,
                   const std::string& sample_range);

}  // namespace softsense
