#include "softsense/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "softsense/csv.hpp"
#include "softsense/errors.hpp"

namespace softsense {

ParamGrads ParamGrads::zeros(std::size_t n, std::size_t d, std::size_t window,
                             std::size_t hidden) {
    ParamGrads g;
    g.z = Matrix(n, d);
    g.w = Matrix(d, window);
    g.a.assign(4 * d, 0.0);
    g.theta_w = Matrix(hidden, n * d);
    g.theta_b.assign(hidden, 0.0);
    g.readout_w.assign(hidden, 0.0);
    g.readout_b = 0.0;
    return g;
}

void ParamGrads::add(const ParamGrads& other) {
    auto acc = [](auto& dst, const auto& src) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
    };
    acc(z, other.z);
    acc(w, other.w);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += other.a[i];
    acc(theta_w, other.theta_w);
    for (std::size_t i = 0; i < theta_b.size(); ++i) theta_b[i] += other.theta_b[i];
    for (std::size_t i = 0; i < readout_w.size(); ++i) readout_w[i] += other.readout_w[i];
    readout_b += other.readout_b;
}

void ParamGrads::scale(double s) {
    for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] *= s;
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] *= s;
    for (auto& v : a) v *= s;
    for (std::size_t i = 0; i < theta_w.size(); ++i) theta_w.data()[i] *= s;
    for (auto& v : theta_b) v *= s;
    for (auto& v : readout_w) v *= s;
    readout_b *= s;
}

ParamGrads backward(const ForwardTrace& tr, double y, const ModelParams& params,
                    const Matrix& z) {
    const std::size_t n = z.rows();
    const std::size_t d = z.cols();
    const std::size_t hidden = params.theta_b.size();
    if (tr.n.rows() != n || tr.n.cols() != d || tr.hidden_act.size() != hidden) {
        throw ShapeError("backward: trace does not match the given parameters");
    }
    const Adjacency& adj = tr.adj;
    ParamGrads g = ParamGrads::zeros(n, d, tr.x.cols(), hidden);

    const double dy = 2.0 * (tr.y_hat - y);

    // readout: y_hat = readout_w . (hidden_act * drop) + readout_b
    g.readout_b = dy;
    Vec d_hidden_pre(hidden, 0.0);
    const bool dropped = !tr.drop_scale.empty();
    for (std::size_t h = 0; h < hidden; ++h) {
        const double scale = dropped ? tr.drop_scale[h] : 1.0;
        g.readout_w[h] = dy * tr.hidden_act[h] * scale;
        const double dh_act = dy * params.readout_w[h] * scale;
        d_hidden_pre[h] = tr.hidden_act[h] > 0.0 ? dh_act : 0.0;
    }

    // hidden layer: hidden_pre = theta_w . gated + theta_b
    g.theta_b = d_hidden_pre;
    outer_acc(g.theta_w, d_hidden_pre, tr.gated);
    const Vec d_gated = matvec_t(params.theta_w, d_hidden_pre);

    // gating: gated[i*d+c] = z_ic * n_ic
    Matrix d_n(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            const double dg = d_gated[i * d + c];
            g.z(i, c) += dg * tr.n(i, c);
            d_n(i, c) = dg * z(i, c);
        }
    }

    // aggregation: n_i = ReLU(sum_{j in S_i} alpha_ij proj_j), S_i = N(i) + self
    Matrix d_agg(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            d_agg(i, c) = tr.n(i, c) > 0.0 ? d_n(i, c) : 0.0;
        }
    }

    Matrix d_alpha(n, n, 0.0);
    Matrix d_proj(n, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto dui = d_agg.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && !adj.at(i, j)) continue;
            d_alpha(i, j) = dot(dui, tr.proj.row(j));
            const double aij = tr.alpha(i, j);
            auto dpj = d_proj.row(j);
            for (std::size_t c = 0; c < d; ++c) dpj[c] += aij * dui[c];
        }
    }

    // softmax rows: d_pi_ij = alpha_ij (d_alpha_ij - sum_k alpha_ik d_alpha_ik)
    Matrix d_scores(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || adj.at(i, j)) inner += tr.alpha(i, j) * d_alpha(i, j);
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && !adj.at(i, j)) continue;
            const double d_pi = tr.alpha(i, j) * (d_alpha(i, j) - inner);
            // LeakyReLU branch: stored score > 0 iff pre-activation > 0
            d_scores(i, j) = d_pi * (tr.scores(i, j) > 0.0 ? 1.0 : kLeakySlope);
        }
    }

    // scores: s_ij = a_left . g_i + a_right . g_j
    const std::size_t two_d = 2 * d;
    Matrix d_g(n, two_d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto gi = tr.g.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && !adj.at(i, j)) continue;
            const double ds = d_scores(i, j);
            if (ds == 0.0) continue;
            auto gj = tr.g.row(j);
            auto dgi = d_g.row(i);
            auto dgj = d_g.row(j);
            for (std::size_t c = 0; c < two_d; ++c) {
                g.a[c] += ds * gi[c];
                g.a[two_d + c] += ds * gj[c];
                dgi[c] += ds * params.a[c];
                dgj[c] += ds * params.a[two_d + c];
            }
        }
    }

    // node features: g_i = z_i (+) proj_i
    for (std::size_t i = 0; i < n; ++i) {
        auto dgi = d_g.row(i);
        for (std::size_t c = 0; c < d; ++c) {
            g.z(i, c) += dgi[c];
            d_proj(i, c) += dgi[d + c];
        }
    }

    // projection: proj_i = W x_i
    for (std::size_t i = 0; i < n; ++i) {
        outer_acc(g.w, d_proj.row(i), tr.x.row(i));
    }
    return g;
}

std::vector<TensorView> trainable_views(Matrix& z, ModelParams& params) {
    return {
        {"Z", z.data(), z.size()},
        {"W", params.w.data(), params.w.size()},
        {"a", params.a.data(), params.a.size()},
        {"theta_w", params.theta_w.data(), params.theta_w.size()},
        {"theta_b", params.theta_b.data(), params.theta_b.size()},
        {"readout_w", params.readout_w.data(), params.readout_w.size()},
        {"readout_b", &params.readout_b, 1},
    };
}

std::vector<TensorView> grad_views(ParamGrads& grads) {
    return {
        {"Z", grads.z.data(), grads.z.size()},
        {"W", grads.w.data(), grads.w.size()},
        {"a", grads.a.data(), grads.a.size()},
        {"theta_w", grads.theta_w.data(), grads.theta_w.size()},
        {"theta_b", grads.theta_b.data(), grads.theta_b.size()},
        {"readout_w", grads.readout_w.data(), grads.readout_w.size()},
        {"readout_b", &grads.readout_b, 1},
    };
}

namespace {

// Deterministic per-sample dropout stream: independent of batch order and of
// how samples are partitioned across workers.
std::uint64_t dropout_seed(std::uint64_t master, std::size_t epoch, std::size_t sample_idx) {
    return mix_seed(mix_seed(master, 0xD120 + epoch), sample_idx);
}

double global_grad_norm(const std::vector<TensorView>& views) {
    double ss = 0.0;
    for (const auto& view : views) {
        for (std::size_t i = 0; i < view.size; ++i) ss += view.data[i] * view.data[i];
    }
    return std::sqrt(ss);
}

// Sums per-worker gradient buffers in worker order, so results are identical
// across runs for a fixed thread count (and equal to sequential at 1).
void batch_gradients(const std::vector<WindowSample>& samples, std::size_t lo, std::size_t hi,
                     const Matrix& z, const ModelParams& params, const Adjacency& adj,
                     const TrainConfig& cfg, std::size_t epoch, ParamGrads& out,
                     double& sq_err_sum) {
    const std::size_t count = hi - lo;
    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.threads, count));
    std::vector<ParamGrads> buffers;
    std::vector<double> losses(workers, 0.0);
    buffers.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        buffers.push_back(ParamGrads::zeros(z.rows(), z.cols(), cfg.window, cfg.hidden_width));
    }

    auto run_chunk = [&](std::size_t worker, std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            const WindowSample& sample = samples[s];
            Rng drop_rng(dropout_seed(cfg.seed, epoch, s));
            const ForwardTrace trace =
                forward(z, sample.x, params, adj, cfg.dropout, true, &drop_rng);
            const double err = trace.y_hat - sample.y;
            const double sq = err * err;
            if (!std::isfinite(sq)) {
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", sample " + std::to_string(s));
            }
            losses[worker] += sq;
            buffers[worker].add(backward(trace, sample.y, params, z));
        }
    };

    if (workers == 1) {
        run_chunk(0, lo, hi);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (count + workers - 1) / workers;
        for (std::size_t t = 0; t < workers; ++t) {
            const std::size_t begin = lo + t * chunk;
            const std::size_t end = std::min(hi, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(run_chunk, t, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    out = std::move(buffers[0]);
    for (std::size_t t = 1; t < workers; ++t) out.add(buffers[t]);
    for (const double l : losses) sq_err_sum += l;
}

double validation_mse(const std::vector<WindowSample>& samples, const Matrix& z,
                      const ModelParams& params, const Adjacency& adj, std::size_t threads) {
    Vec preds(samples.size(), 0.0);
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, samples.size()));
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            preds[s] = forward(z, samples[s].x, params, adj, 0.0, false).y_hat;
        }
    };
    if (workers == 1) {
        run(0, samples.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (samples.size() + workers - 1) / workers;
        for (std::size_t t = 0; t < workers; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(samples.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(run, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    double ss = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const double r = preds[s] - samples[s].y;
        ss += r * r;
    }
    return ss / static_cast<double>(samples.size());
}

}  // namespace

TrainResult train(const ProcessDataset& ds, const TrainConfig& cfg, std::size_t target_index) {
    cfg.validate();
    const std::size_t d_vars = ds.n_vars();
    if (target_index >= d_vars) {
        throw ShapeError("train: target index " + std::to_string(target_index) +
                         " out of range for " + std::to_string(d_vars) + " variables");
    }
    if (d_vars < 3) {
        throw ShapeError("train: need at least 2 input sensors besides the target, got " +
                         std::to_string(d_vars) + " variables");
    }
    const std::size_t n = d_vars - 1;
    if (cfg.k > n - 1) {
        throw ConfigError("train: k = " + std::to_string(cfg.k) + " out of range for " +
                          std::to_string(n) + " input sensors (need k <= N-1)");
    }
    const std::size_t t_rows = ds.n_rows();
    if (cfg.window >= t_rows) {
        throw std::runtime_error("train: window " + std::to_string(cfg.window) +
                                 " too large for " + std::to_string(t_rows) + " rows");
    }

    // Stats come from the rows covered by training windows only.
    const std::size_t n_samples = t_rows - cfg.window;
    const auto n_train =
        static_cast<std::size_t>(std::llround(cfg.fractions.train * n_samples));
    if (n_train == 0) throw std::runtime_error("train: training split is empty");
    const NormalizationStats stats = fit_normalizer(ds, 0, cfg.window + n_train);
    const ProcessDataset normalized = apply_normalizer(ds, stats);

    const auto samples = make_windows(normalized, target_index, cfg.window);
    const SampleSplit split = split_chronological(samples, cfg.fractions);

    Matrix z = init_embeddings(n, cfg.embedding_dim, mix_seed(cfg.seed, 10));
    ModelParams params =
        ModelParams::init(n, cfg.embedding_dim, cfg.window, cfg.hidden_width, mix_seed(cfg.seed, 11));
    auto views = trainable_views(z, params);
    AdamState adam = AdamState::init(views);

    TrainResult result;
    Matrix best_z = z;
    ModelParams best_params = params;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    std::size_t stalled = 0;

    const std::size_t n_batches = (split.train.size() + cfg.batch_size - 1) / cfg.batch_size;
    Adjacency adj = graph_for(z, cfg.k, cfg.symmetric_graph);

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        if (cfg.graph_refresh == GraphRefresh::PerEpoch) adj = graph_for(z, cfg.k, cfg.symmetric_graph);

        std::vector<std::size_t> batch_order(n_batches);
        std::iota(batch_order.begin(), batch_order.end(), 0);
        Rng shuffle_rng(mix_seed(cfg.seed, 0x5A00 + epoch));
        shuffle_rng.shuffle(batch_order);

        double sq_err_sum = 0.0;
        for (const std::size_t b : batch_order) {
            if (cfg.graph_refresh == GraphRefresh::PerBatch) adj = graph_for(z, cfg.k, cfg.symmetric_graph);
            const std::size_t lo = b * cfg.batch_size;
            const std::size_t hi = std::min(split.train.size(), lo + cfg.batch_size);
            ParamGrads grads;
            batch_gradients(split.train, lo, hi, z, params, adj, cfg, epoch, grads, sq_err_sum);
            grads.scale(1.0 / static_cast<double>(hi - lo));
            auto gviews = grad_views(grads);
            if (cfg.grad_clip > 0.0) {
                const double norm = global_grad_norm(gviews);
                if (norm > cfg.grad_clip) grads.scale(cfg.grad_clip / norm);
            }
            adam_step(views, gviews, adam, cfg.learning_rate);
        }

        // Validation uses the graph implied by the current embeddings, the
        // same one a reloaded checkpoint would rebuild.
        const Adjacency val_adj = graph_for(z, cfg.k, cfg.symmetric_graph);
        const double val_mse = validation_mse(split.val, z, params, val_adj, cfg.threads);
        if (!std::isfinite(val_mse)) {
            throw std::runtime_error("train: non-finite validation loss at epoch " +
                                     std::to_string(epoch));
        }
        const double train_mse = sq_err_sum / static_cast<double>(split.train.size());
        const auto t1 = std::chrono::steady_clock::now();
        result.history.push_back({epoch, train_mse, val_mse, cfg.learning_rate,
                                  std::chrono::duration<double>(t1 - t0).count()});

        if (val_mse < best_val) {
            best_val = val_mse;
            best_epoch = epoch;
            best_z = z;
            best_params = params;
            stalled = 0;
        } else {
            ++stalled;
            if (stalled >= cfg.patience) break;
        }
    }

    result.best_epoch = best_epoch;
    result.best_val_mse = best_val;
    result.checkpoint.format = kCheckpointFormat;
    result.checkpoint.config = cfg;
    result.checkpoint.target_index = target_index;
    result.checkpoint.target_tag = ds.variable_meta[target_index].tag;
    result.checkpoint.dataset_tags = ds.tags();
    result.checkpoint.stats = stats;
    result.checkpoint.z = std::move(best_z);
    result.checkpoint.params = std::move(best_params);
    return result;
}

EvalResult evaluate(const Checkpoint& ckpt, const std::vector<WindowSample>& samples,
                    std::size_t threads) {
    if (samples.empty()) throw std::runtime_error("evaluate: no samples");
    const std::size_t n = ckpt.z.rows();
    if (samples.front().x.rows() != n || samples.front().x.cols() != ckpt.config.window) {
        throw ShapeError("evaluate: samples are " + std::to_string(samples.front().x.rows()) +
                         "x" + std::to_string(samples.front().x.cols()) + ", checkpoint expects " +
                         std::to_string(n) + "x" + std::to_string(ckpt.config.window));
    }
    const Adjacency adj = graph_for(ckpt.z, ckpt.config.k, ckpt.config.symmetric_graph);

    Vec y_hat_norm(samples.size(), 0.0);
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, samples.size()));
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            y_hat_norm[s] = forward(ckpt.z, samples[s].x, ckpt.params, adj, 0.0, false).y_hat;
        }
    };
    if (workers == 1) {
        run(0, samples.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (samples.size() + workers - 1) / workers;
        for (std::size_t t = 0; t < workers; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(samples.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(run, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    EvalResult out;
    Vec y_true(samples.size()), y_pred(samples.size());
    out.predictions.reserve(samples.size());
    for (std::size_t s = 0; s < samples.size(); ++s) {
        y_true[s] = denormalize_value(ckpt.stats, ckpt.target_index, samples[s].y);
        y_pred[s] = denormalize_value(ckpt.stats, ckpt.target_index, y_hat_norm[s]);
        out.predictions.push_back({samples[s].t_index, y_true[s], y_pred[s]});
    }
    out.report = make_report(y_true, y_pred);
    return out;
}

std::vector<WindowSample> windows_for_split(const ProcessDataset& raw, const Checkpoint& ckpt,
                                            const std::string& split) {
    if (raw.n_vars() != ckpt.dataset_tags.size()) {
        throw ShapeError("dataset has " + std::to_string(raw.n_vars()) +
                         " variables, checkpoint expects " +
                         std::to_string(ckpt.dataset_tags.size()));
    }
    const auto tags = raw.tags();
    for (std::size_t c = 0; c < tags.size(); ++c) {
        if (tags[c] != ckpt.dataset_tags[c]) {
            throw ShapeError("column " + std::to_string(c + 1) + " is '" + tags[c] +
                             "', checkpoint expects '" + ckpt.dataset_tags[c] + "'");
        }
    }
    const ProcessDataset normalized = apply_normalizer(raw, ckpt.stats);
    auto samples = make_windows(normalized, ckpt.target_index, ckpt.config.window);
    if (split == "all") return samples;
    const SampleSplit parts = split_chronological(samples, ckpt.config.fractions);
    if (split == "train") return parts.train;
    if (split == "val") return parts.val;
    if (split == "test") return parts.test;
    throw ConfigError("unknown split '" + split + "' (use train|val|test|all)");
}

void save_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    out << "epoch,train_mse,val_mse,lr,wall_time\n";
    for (const auto& row : history) {
        out << row.epoch << ',' << format_double(row.train_mse) << ','
            << format_double(row.val_mse) << ',' << format_double(row.lr) << ','
            << format_double(row.wall_s) << '\n';
    }
}

}  // namespace softsense
