#include "softsense/model.hpp"

#include <cmath>
#include <string>

#include "softsense/errors.hpp"

namespace softsense {

ModelParams ModelParams::init(std::size_t n, std::size_t d, std::size_t window,
                              std::size_t hidden, std::uint64_t seed) {
    ModelParams p;
    p.w = Matrix(d, window);
    p.a.assign(4 * d, 0.0);
    p.theta_w = Matrix(hidden, n * d);
    p.theta_b.assign(hidden, 0.0);
    p.readout_w.assign(hidden, 0.0);
    p.readout_b = 0.0;

    Rng rw(mix_seed(seed, 1));
    const double sw = 1.0 / std::sqrt(static_cast<double>(window));
    for (std::size_t i = 0; i < p.w.size(); ++i) p.w.data()[i] = rw.normal(0.0, sw);

    Rng ra(mix_seed(seed, 2));
    const double sa = 1.0 / std::sqrt(static_cast<double>(4 * d));
    for (auto& v : p.a) v = ra.normal(0.0, sa);

    Rng rt(mix_seed(seed, 3));
    const double st = 1.0 / std::sqrt(static_cast<double>(n * d));
    for (std::size_t i = 0; i < p.theta_w.size(); ++i) p.theta_w.data()[i] = rt.normal(0.0, st);

    Rng rr(mix_seed(seed, 4));
    const double sr = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (auto& v : p.readout_w) v = rr.normal(0.0, sr);
    return p;
}

Matrix node_features(const Matrix& z, const Matrix& x, const Matrix& w) {
    const std::size_t n = z.rows();
    const std::size_t d = z.cols();
    if (x.rows() != n) {
        throw ShapeError("node_features: window has " + std::to_string(x.rows()) +
                         " rows, embedding table has " + std::to_string(n));
    }
    if (w.rows() != d || w.cols() != x.cols()) {
        throw ShapeError("node_features: projection is " + std::to_string(w.rows()) + "x" +
                         std::to_string(w.cols()) + ", expected " + std::to_string(d) + "x" +
                         std::to_string(x.cols()));
    }
    Matrix g(n, 2 * d);
    for (std::size_t i = 0; i < n; ++i) {
        auto zi = z.row(i);
        const Vec pi = matvec(w, x.row(i));
        auto gi = g.row(i);
        for (std::size_t c = 0; c < d; ++c) gi[c] = zi[c];
        for (std::size_t c = 0; c < d; ++c) gi[d + c] = pi[c];
    }
    return g;
}

static double leaky_relu(double v) { return v > 0.0 ? v : kLeakySlope * v; }

Matrix attention_scores(const Matrix& g, const Vec& a, const Adjacency& adj) {
    const std::size_t n = g.rows();
    const std::size_t two_d = g.cols();
    if (a.size() != 2 * two_d) {
        throw ShapeError("attention_scores: attention vector has " + std::to_string(a.size()) +
                         " entries, expected " + std::to_string(2 * two_d));
    }
    if (adj.n != n) throw ShapeError("attention_scores: adjacency size mismatch");

    // a^T (g_i (+) g_j) splits into a_left.g_i + a_right.g_j
    Vec left(n, 0.0), right(n, 0.0);
    const std::span<const double> a_left{a.data(), two_d};
    const std::span<const double> a_right{a.data() + two_d, two_d};
    for (std::size_t i = 0; i < n; ++i) {
        left[i] = dot(a_left, g.row(i));
        right[i] = dot(a_right, g.row(i));
    }
    Matrix scores(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        scores(i, i) = leaky_relu(left[i] + right[i]);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && adj.at(i, j)) scores(i, j) = leaky_relu(left[i] + right[j]);
        }
    }
    return scores;
}

Matrix attention_probs(const Matrix& scores, const Adjacency& adj) {
    const std::size_t n = scores.rows();
    if (adj.n != n) throw ShapeError("attention_probs: adjacency size mismatch");
    Matrix alpha(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double hi = scores(i, i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && adj.at(i, j)) hi = std::max(hi, scores(i, j));
        }
        double denom = std::exp(scores(i, i) - hi);
        alpha(i, i) = denom;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && adj.at(i, j)) {
                alpha(i, j) = std::exp(scores(i, j) - hi);
                denom += alpha(i, j);
            }
        }
        alpha(i, i) /= denom;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && adj.at(i, j)) alpha(i, j) /= denom;
        }
    }
    return alpha;
}

Matrix aggregate(const Matrix& alpha, const Matrix& x, const Matrix& w, const Adjacency& adj) {
    const std::size_t n = x.rows();
    const std::size_t d = w.rows();
    if (alpha.rows() != n || alpha.cols() != n || adj.n != n) {
        throw ShapeError("aggregate: attention/adjacency size mismatch");
    }
    if (w.cols() != x.cols()) throw ShapeError("aggregate: projection width mismatch");
    Matrix proj(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec pi = matvec(w, x.row(i));
        for (std::size_t c = 0; c < d; ++c) proj(i, c) = pi[c];
    }
    Matrix out(n, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto oi = out.row(i);
        for (std::size_t c = 0; c < d; ++c) oi[c] = alpha(i, i) * proj(i, c);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !adj.at(i, j)) continue;
            const double aij = alpha(i, j);
            auto pj = proj.row(j);
            for (std::size_t c = 0; c < d; ++c) oi[c] += aij * pj[c];
        }
        for (std::size_t c = 0; c < d; ++c) oi[c] = std::max(0.0, oi[c]);
    }
    return out;
}

double readout(const Matrix& z, const Matrix& n, const ModelParams& params, double dropout,
               bool training, Rng* rng) {
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("readout: dropout must be in [0, 1)");
    const std::size_t nodes = z.rows();
    const std::size_t d = z.cols();
    if (n.rows() != nodes || n.cols() != d) throw ShapeError("readout: node embedding shape mismatch");
    if (params.theta_w.cols() != nodes * d) {
        throw ShapeError("readout: hidden layer expects " + std::to_string(params.theta_w.cols()) +
                         " inputs, got " + std::to_string(nodes * d));
    }
    Vec gated(nodes * d);
    for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t c = 0; c < d; ++c) gated[i * d + c] = z(i, c) * n(i, c);
    }
    Vec hidden = matvec(params.theta_w, gated);
    for (std::size_t h = 0; h < hidden.size(); ++h) {
        hidden[h] = std::max(0.0, hidden[h] + params.theta_b[h]);
    }
    if (training && dropout > 0.0) {
        if (rng == nullptr) throw std::runtime_error("readout: dropout in training mode needs an RNG");
        const double keep_scale = 1.0 / (1.0 - dropout);
        for (auto& h : hidden) h *= (rng->uniform() < dropout) ? 0.0 : keep_scale;
    }
    return dot(params.readout_w, hidden) + params.readout_b;
}

double mse_loss(std::span<const double> y, std::span<const double> y_hat) {
    if (y.empty()) throw std::runtime_error("mse_loss: empty input");
    if (y.size() != y_hat.size()) {
        throw ShapeError("mse_loss: length mismatch (" + std::to_string(y.size()) + " vs " +
                         std::to_string(y_hat.size()) + ")");
    }
    double s = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double r = y_hat[t] - y[t];
        s += r * r;
    }
    return s / static_cast<double>(y.size());
}

ForwardTrace forward(const Matrix& z, const Matrix& x, const ModelParams& params,
                     const Adjacency& adj, double dropout, bool training, Rng* rng) {
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("forward: dropout must be in [0, 1)");
    const std::size_t n = z.rows();
    const std::size_t d = z.cols();

    ForwardTrace tr;
    tr.x = x;
    tr.adj = adj;

    tr.proj = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec pi = matvec(params.w, x.row(i));
        for (std::size_t c = 0; c < d; ++c) tr.proj(i, c) = pi[c];
    }

    tr.g = Matrix(n, 2 * d);
    for (std::size_t i = 0; i < n; ++i) {
        auto gi = tr.g.row(i);
        for (std::size_t c = 0; c < d; ++c) gi[c] = z(i, c);
        for (std::size_t c = 0; c < d; ++c) gi[d + c] = tr.proj(i, c);
    }

    tr.scores = attention_scores(tr.g, params.a, adj);
    tr.alpha = attention_probs(tr.scores, adj);

    tr.n = Matrix(n, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto oi = tr.n.row(i);
        for (std::size_t c = 0; c < d; ++c) oi[c] = tr.alpha(i, i) * tr.proj(i, c);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !adj.at(i, j)) continue;
            const double aij = tr.alpha(i, j);
            for (std::size_t c = 0; c < d; ++c) oi[c] += aij * tr.proj(j, c);
        }
        for (std::size_t c = 0; c < d; ++c) oi[c] = std::max(0.0, oi[c]);
    }

    tr.gated.assign(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) tr.gated[i * d + c] = z(i, c) * tr.n(i, c);
    }

    tr.hidden_act = matvec(params.theta_w, tr.gated);
    for (std::size_t h = 0; h < tr.hidden_act.size(); ++h) {
        tr.hidden_act[h] = std::max(0.0, tr.hidden_act[h] + params.theta_b[h]);
    }

    double y_hat = params.readout_b;
    if (training && dropout > 0.0) {
        if (rng == nullptr) throw std::runtime_error("forward: dropout in training mode needs an RNG");
        tr.drop_scale.assign(tr.hidden_act.size(), 0.0);
        const double keep_scale = 1.0 / (1.0 - dropout);
        for (std::size_t h = 0; h < tr.hidden_act.size(); ++h) {
            tr.drop_scale[h] = (rng->uniform() < dropout) ? 0.0 : keep_scale;
            y_hat += params.readout_w[h] * tr.hidden_act[h] * tr.drop_scale[h];
        }
    } else {
        for (std::size_t h = 0; h < tr.hidden_act.size(); ++h) {
            y_hat += params.readout_w[h] * tr.hidden_act[h];
        }
    }
    tr.y_hat = y_hat;
    return tr;
}

}  // namespace softsense
