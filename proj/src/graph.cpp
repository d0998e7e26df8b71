#include "softsense/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "softsense/errors.hpp"
#include "softsense/rng.hpp"

namespace softsense {

Matrix init_embeddings(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n < 2) {
        throw ConfigError("init_embeddings: need at least 2 sensors, got " + std::to_string(n));
    }
    if (d < 1) throw ConfigError("init_embeddings: embedding dimension must be >= 1");
    Rng rng(mix_seed(seed, 0xE5B));
    Matrix z(n, d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] = rng.normal(0.0, scale);
    return z;
}

Matrix cosine_similarity_matrix(const Matrix& z) {
    const std::size_t n = z.rows();
    Vec norms(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = std::sqrt(dot(z.row(i), z.row(i)));
        if (norms[i] <= 1e-12) {
            throw std::runtime_error("cosine_similarity_matrix: sensor " + std::to_string(i) +
                                     " has a zero-norm embedding");
        }
    }
    Matrix sim(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double e = dot(z.row(i), z.row(j)) / (norms[i] * norms[j]);
            sim(i, j) = e;
            sim(j, i) = e;
        }
    }
    return sim;
}

Adjacency topk_adjacency(const Matrix& similarity, std::size_t k) {
    const std::size_t n = similarity.rows();
    if (n == 0 || similarity.cols() != n) {
        throw ShapeError("topk_adjacency: similarity matrix not square or empty");
    }
    if (k > n - 1) {
        throw ConfigError("topk_adjacency: k = " + std::to_string(k) +
                          " out of range for " + std::to_string(n) + " nodes (need 0 <= k <= N-1)");
    }
    Adjacency adj(n, k);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        // stable on equal scores, so ties go to the lower index
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return similarity(i, a) > similarity(i, b);
        });
        for (std::size_t r = 0; r < k; ++r) adj.set(i, order[r], 1);
    }
    return adj;
}

std::vector<std::size_t> neighbors(const Adjacency& adj, std::size_t i) {
    if (i >= adj.n) throw ShapeError("neighbors: node index out of range");
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < adj.n; ++j)
        if (adj.at(i, j)) out.push_back(j);
    return out;
}

LearnedGraph learn_graph(const Matrix& z, std::size_t k) {
    LearnedGraph g;
    g.similarity = cosine_similarity_matrix(z);
    g.adj = topk_adjacency(g.similarity, k);
    return g;
}

Adjacency symmetrize(const Adjacency& adj) {
    Adjacency out = adj;
    for (std::size_t i = 0; i < adj.n; ++i) {
        for (std::size_t j = 0; j < adj.n; ++j) {
            if (adj.at(i, j)) out.set(j, i, 1);
        }
    }
    return out;
}

Adjacency graph_for(const Matrix& z, std::size_t k, bool symmetric) {
    Adjacency adj = learn_graph(z, k).adj;
    return symmetric ? symmetrize(adj) : adj;
}

void save_graph_json(const LearnedGraph& graph, const std::vector<std::string>& tags,
                     const std::string& path) {
    nlohmann::json j;
    j["k"] = graph.adj.k;
    j["tags"] = tags;
    auto edges = nlohmann::json::array();
    for (std::size_t i = 0; i < graph.adj.n; ++i) {
        for (std::size_t src = 0; src < graph.adj.n; ++src) {
            if (graph.adj.at(i, src)) {
                edges.push_back({src, i, graph.similarity(i, src)});
            }
        }
    }
    j["edges"] = std::move(edges);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace softsense
