#pragma once

#include <cstdint>
#include <span>

#include "softsense/graph.hpp"
#include "softsense/matrix.hpp"
#include "softsense/rng.hpp"

namespace softsense {

inline constexpr double kLeakySlope = 0.2;

// Trainable parameters besides the embedding table: the shared window
// projection, the attention vector, the hidden layer and the readout head.
struct ModelParams {
    Matrix w;          // d x window, shared linear projection
    Vec a;             // 4d attention weights
    Matrix theta_w;    // hidden x (N*d)
    Vec theta_b;       // hidden
    Vec readout_w;     // hidden
    double readout_b = 0.0;

    static ModelParams init(std::size_t n, std::size_t d, std::size_t window,
                            std::size_t hidden, std::uint64_t seed);
    bool operator==(const ModelParams& o) const = default;
};

// Everything the forward pass computed, kept for the backward pass and for
// attention export. alpha is zero outside the adjacency support plus the
// diagonal, and each row sums to 1 over that support.
struct ForwardTrace {
    Matrix x;           // N x w input window
    Adjacency adj;
    Matrix proj;        // N x d, rows W x_i
    Matrix g;           // N x 2d node features
    Matrix scores;      // N x N LeakyReLU attention scores on the support
    Matrix alpha;       // N x N attention probabilities
    Matrix n;           // N x d aggregated node embeddings (post-ReLU)
    Vec gated;          // N*d readout input, z_i * n_i per node
    Vec hidden_act;     // hidden layer after ReLU, before dropout
    Vec drop_scale;     // per-unit dropout factors (empty when not training)
    double y_hat = 0.0;
};

// g_i = z_i (+) W x_i
Matrix node_features(const Matrix& z, const Matrix& x, const Matrix& w);

// pi_ij = LeakyReLU(a^T (g_i (+) g_j)) for j in N(i) and j = i; zero elsewhere.
Matrix attention_scores(const Matrix& g, const Vec& a, const Adjacency& adj);

// Row softmax of the scores over each node's support, with per-row max
// subtraction. alpha_ii is always defined (support includes self).
Matrix attention_probs(const Matrix& scores, const Adjacency& adj);

// n_i = ReLU(alpha_ii W x_i + sum_{j in N(i)} alpha_ij W x_j)
Matrix aggregate(const Matrix& alpha, const Matrix& x, const Matrix& w, const Adjacency& adj);

// Gates node embeddings with the sensor embeddings, applies the hidden layer
// (ReLU, dropout when training) and the scalar readout.
double readout(const Matrix& z, const Matrix& n, const ModelParams& params, double dropout,
               bool training, Rng* rng = nullptr);

double mse_loss(std::span<const double> y, std::span<const double> y_hat);

ForwardTrace forward(const Matrix& z, const Matrix& x, const ModelParams& params,
                     const Adjacency& adj, double dropout, bool training, Rng* rng = nullptr);

}  // namespace softsense
