#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softsense/dataset.hpp"
#include "softsense/matrix.hpp"
#include "softsense/model.hpp"

namespace softsense {

enum class GraphRefresh { PerEpoch, PerBatch };

std::string to_string(GraphRefresh r);
GraphRefresh graph_refresh_from_string(const std::string& s);

struct TrainConfig {
    std::size_t embedding_dim = 64;
    std::size_t batch_size = 64;
    std::size_t hidden_width = 128;
    double dropout = 0.2;
    double learning_rate = 0.001;
    std::size_t window = 85;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
    std::size_t k = 6;
    std::uint64_t seed = 42;
    GraphRefresh graph_refresh = GraphRefresh::PerEpoch;
    bool symmetric_graph = false;  // union the top-k edges with their reverses
    SplitFractions fractions;
    double grad_clip = 0.0;  // global-norm threshold, 0 disables
    std::size_t threads = 1;

    void validate() const;  // throws ConfigError on bad values
    bool operator==(const TrainConfig& o) const = default;
};

inline constexpr const char* kCheckpointFormat = "softsense-checkpoint-v1";

struct Checkpoint {
    std::string format = kCheckpointFormat;
    TrainConfig config;
    std::string target_tag;
    std::size_t target_index = 0;          // column in the original dataset
    std::vector<std::string> dataset_tags; // all D columns, original order
    NormalizationStats stats;
    Matrix z;            // N x d sensor embeddings
    ModelParams params;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);
std::string checkpoint_to_json(const Checkpoint& ckpt);

}  // namespace softsense
