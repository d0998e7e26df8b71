#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softsense/matrix.hpp"

namespace softsense {

// Directed sensor graph. at(i, j) == 1 means sensor j is an in-neighbor of
// sensor i (edge j -> i); each row holds exactly k ones and a zero diagonal.
struct Adjacency {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::uint8_t> edges;  // row-major, n x n

    Adjacency() = default;
    Adjacency(std::size_t n_, std::size_t k_) : n(n_), k(k_), edges(n_ * n_, 0) {}

    std::uint8_t at(std::size_t dest, std::size_t src) const { return edges[dest * n + src]; }
    void set(std::size_t dest, std::size_t src, std::uint8_t v) { edges[dest * n + src] = v; }

    bool operator==(const Adjacency& o) const = default;
};

struct LearnedGraph {
    Matrix similarity;  // n x n cosine scores, diagonal zeroed (self is not a candidate)
    Adjacency adj;
};

// N x d table, rows are sensor embeddings. Entries drawn i.i.d. zero-mean
// with scale 1/sqrt(d); deterministic under seed.
Matrix init_embeddings(std::size_t n, std::size_t d, std::uint64_t seed);

// Pairwise cosine similarity of embedding rows; symmetric, diagonal zeroed.
// Errors on a zero-norm row, naming the sensor.
Matrix cosine_similarity_matrix(const Matrix& z);

// Keeps, for each destination i, the k most similar candidates j != i.
// Ties broken toward the lower sensor index.
Adjacency topk_adjacency(const Matrix& similarity, std::size_t k);

// In-neighbors of node i in ascending index order.
std::vector<std::size_t> neighbors(const Adjacency& adj, std::size_t i);

LearnedGraph learn_graph(const Matrix& z, std::size_t k);

// Union with the transpose: j -> i implies i -> j. Row counts then vary.
Adjacency symmetrize(const Adjacency& adj);

// Adjacency a model should use for the given embeddings and config.
Adjacency graph_for(const Matrix& z, std::size_t k, bool symmetric);

// {k, edges: [[j, i, e_ji], ...]}
void save_graph_json(const LearnedGraph& graph, const std::vector<std::string>& tags,
                     const std::string& path);

}  // namespace softsense
