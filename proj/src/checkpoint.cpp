#include "softsense/checkpoint.hpp"

#include <fstream>

#include "json.hpp"
#include "softsense/errors.hpp"

namespace softsense {

std::string to_string(GraphRefresh r) {
    return r == GraphRefresh::PerEpoch ? "per-epoch" : "per-batch";
}

GraphRefresh graph_refresh_from_string(const std::string& s) {
    if (s == "per-epoch") return GraphRefresh::PerEpoch;
    if (s == "per-batch") return GraphRefresh::PerBatch;
    throw ConfigError("graph_refresh must be 'per-epoch' or 'per-batch', got '" + s + "'");
}

void TrainConfig::validate() const {
    if (embedding_dim < 1) throw ConfigError("embedding_dim must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
    if (hidden_width < 1) throw ConfigError("hidden_width must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (window < 1) throw ConfigError("window must be positive");
    if (max_epochs < 1) throw ConfigError("max_epochs must be positive");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (grad_clip < 0.0) throw ConfigError("grad_clip must be >= 0");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (fractions.train <= 0 || fractions.val <= 0 || fractions.test <= 0) {
        throw ConfigError("split fractions must all be positive");
    }
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    const std::size_t rows = j.size();
    const std::size_t cols = rows ? j[0].size() : 0;
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

nlohmann::json config_to_json(const TrainConfig& c) {
    return {
        {"embedding_dim", c.embedding_dim},
        {"batch_size", c.batch_size},
        {"hidden_width", c.hidden_width},
        {"dropout", c.dropout},
        {"learning_rate", c.learning_rate},
        {"window", c.window},
        {"max_epochs", c.max_epochs},
        {"patience", c.patience},
        {"k", c.k},
        {"seed", c.seed},
        {"graph_refresh", to_string(c.graph_refresh)},
        {"symmetric_graph", c.symmetric_graph},
        {"train_frac", c.fractions.train},
        {"val_frac", c.fractions.val},
        {"test_frac", c.fractions.test},
        {"grad_clip", c.grad_clip},
        {"threads", c.threads},
    };
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.hidden_width = j.at("hidden_width").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.window = j.at("window").get<std::size_t>();
    c.max_epochs = j.at("max_epochs").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.k = j.at("k").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.graph_refresh = graph_refresh_from_string(j.at("graph_refresh").get<std::string>());
    c.symmetric_graph = j.value("symmetric_graph", false);
    c.fractions.train = j.at("train_frac").get<double>();
    c.fractions.val = j.at("val_frac").get<double>();
    c.fractions.test = j.at("test_frac").get<double>();
    c.grad_clip = j.value("grad_clip", 0.0);
    c.threads = j.value("threads", std::size_t{1});
    return c;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
    nlohmann::json j;
    j["format"] = ckpt.format;
    j["config"] = config_to_json(ckpt.config);
    j["target_tag"] = ckpt.target_tag;
    j["target_index"] = ckpt.target_index;
    j["dataset_tags"] = ckpt.dataset_tags;
    j["normalization"] = {
        {"tags", ckpt.stats.tags},
        {"min", ckpt.stats.min},
        {"max", ckpt.stats.max},
        {"fitted_on", ckpt.stats.fitted_on},
    };
    j["params"] = {
        {"Z", matrix_to_json(ckpt.z)},
        {"W", matrix_to_json(ckpt.params.w)},
        {"a", ckpt.params.a},
        {"theta_w", matrix_to_json(ckpt.params.theta_w)},
        {"theta_b", ckpt.params.theta_b},
        {"readout_w", ckpt.params.readout_w},
        {"readout_b", ckpt.params.readout_b},
    };
    return j.dump(2);
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    out << checkpoint_to_json(ckpt) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);

    Checkpoint ckpt;
    ckpt.format = j.value("format", "");
    if (ckpt.format != kCheckpointFormat) {
        throw ConfigError(path + ": unsupported checkpoint format '" + ckpt.format +
                          "' (expected '" + kCheckpointFormat + "')");
    }
    ckpt.config = config_from_json(j.at("config"));
    ckpt.target_tag = j.at("target_tag").get<std::string>();
    ckpt.target_index = j.at("target_index").get<std::size_t>();
    ckpt.dataset_tags = j.at("dataset_tags").get<std::vector<std::string>>();

    const auto& norm = j.at("normalization");
    ckpt.stats.tags = norm.at("tags").get<std::vector<std::string>>();
    ckpt.stats.min = norm.at("min").get<Vec>();
    ckpt.stats.max = norm.at("max").get<Vec>();
    ckpt.stats.fitted_on = norm.at("fitted_on").get<std::string>();

    const auto& params = j.at("params");
    ckpt.z = matrix_from_json(params.at("Z"));
    ckpt.params.w = matrix_from_json(params.at("W"));
    ckpt.params.a = params.at("a").get<Vec>();
    ckpt.params.theta_w = matrix_from_json(params.at("theta_w"));
    ckpt.params.theta_b = params.at("theta_b").get<Vec>();
    ckpt.params.readout_w = params.at("readout_w").get<Vec>();
    ckpt.params.readout_b = params.at("readout_b").get<double>();
    return ckpt;
}

}  // namespace softsense
