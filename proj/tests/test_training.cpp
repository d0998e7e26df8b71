#include <cmath>
#include <functional>

#include "doctest.h"
#include "softsense/adam.hpp"
#include "softsense/errors.hpp"
#include "softsense/graph.hpp"
#include "softsense/model.hpp"
#include "softsense/rng.hpp"
#include "softsense/synth.hpp"
#include "softsense/training.hpp"
#include "test_helpers.hpp"

using namespace softsense;

namespace {

struct SmallInstance {
    Matrix z;
    ModelParams params;
    Adjacency adj;
    std::vector<Matrix> windows;
    Vec targets;
};

SmallInstance make_instance(std::size_t n, std::size_t d, std::size_t w_len, std::size_t hidden,
                            std::size_t k, std::size_t n_samples, std::uint64_t seed) {
    SmallInstance inst;
    Rng rng(seed);
    inst.z = Matrix(n, d);
    for (std::size_t i = 0; i < inst.z.size(); ++i) inst.z.data()[i] = rng.normal(0.0, 0.7);
    inst.params = ModelParams::init(n, d, w_len, hidden, seed + 1);
    inst.adj = learn_graph(inst.z, k).adj;  // held fixed; top-k carries no gradient
    for (std::size_t s = 0; s < n_samples; ++s) {
        Matrix x(n, w_len);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
        inst.windows.push_back(std::move(x));
        inst.targets.push_back(rng.normal());
    }
    return inst;
}

double batch_loss(const SmallInstance& inst, const Matrix& z, const ModelParams& p) {
    double acc = 0.0;
    for (std::size_t s = 0; s < inst.windows.size(); ++s) {
        const double y_hat = forward(z, inst.windows[s], p, inst.adj, 0.0, false).y_hat;
        const double r = y_hat - inst.targets[s];
        acc += r * r;
    }
    return acc / static_cast<double>(inst.windows.size());
}

ParamGrads batch_gradient(const SmallInstance& inst, const Matrix& z, const ModelParams& p) {
    ParamGrads total = ParamGrads::zeros(z.rows(), z.cols(), inst.windows.front().cols(),
                                         p.theta_b.size());
    for (std::size_t s = 0; s < inst.windows.size(); ++s) {
        const ForwardTrace tr = forward(z, inst.windows[s], p, inst.adj, 0.0, false);
        total.add(backward(tr, inst.targets[s], p, z));
    }
    total.scale(1.0 / static_cast<double>(inst.windows.size()));
    return total;
}

// Worst relative error between analytic and central-difference gradients over
// every trainable entry.
double gradient_check(SmallInstance& inst, double step) {
    ParamGrads analytic = batch_gradient(inst, inst.z, inst.params);
    auto views = trainable_views(inst.z, inst.params);
    auto gviews = grad_views(analytic);
    double worst = 0.0;
    for (std::size_t t = 0; t < views.size(); ++t) {
        for (std::size_t i = 0; i < views[t].size; ++i) {
            double& p = views[t].data[i];
            const double saved = p;
            p = saved + step;
            const double up = batch_loss(inst, inst.z, inst.params);
            p = saved - step;
            const double down = batch_loss(inst, inst.z, inst.params);
            p = saved;
            const double fd = (up - down) / (2.0 * step);
            const double a = gviews[t].data[i];
            const double rel = std::abs(a - fd) / std::max(std::abs(a) + std::abs(fd), 1e-8);
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
    SmallInstance inst = make_instance(5, 4, 6, 8, 2, 3, 12345);
    CHECK(gradient_check(inst, 1e-5) <= 1e-4);
}

TEST_CASE("gradients through an active dropout mask match finite differences") {
    SmallInstance inst = make_instance(4, 3, 5, 10, 2, 1, 321);
    const double rate = 0.3;
    const std::uint64_t mask_seed = 99;  // pinned, so every evaluation sees one mask

    auto loss = [&]() {
        Rng rng(mask_seed);
        const double y_hat =
            forward(inst.z, inst.windows[0], inst.params, inst.adj, rate, true, &rng).y_hat;
        const double r = y_hat - inst.targets[0];
        return r * r;
    };
    Rng rng(mask_seed);
    const ForwardTrace tr =
        forward(inst.z, inst.windows[0], inst.params, inst.adj, rate, true, &rng);
    ParamGrads analytic = backward(tr, inst.targets[0], inst.params, inst.z);

    auto views = trainable_views(inst.z, inst.params);
    auto gviews = grad_views(analytic);
    const double step = 1e-5;
    for (std::size_t t = 0; t < views.size(); ++t) {
        for (std::size_t i = 0; i < views[t].size; ++i) {
            double& p = views[t].data[i];
            const double saved = p;
            p = saved + step;
            const double up = loss();
            p = saved - step;
            const double down = loss();
            p = saved;
            const double fd = (up - down) / (2.0 * step);
            const double a = gviews[t].data[i];
            CHECK(std::abs(a - fd) / std::max(std::abs(a) + std::abs(fd), 1e-8) <= 1e-4);
        }
    }
}

TEST_CASE("zero residual gives zero gradients everywhere") {
    SmallInstance inst = make_instance(4, 3, 5, 6, 2, 1, 77);
    const ForwardTrace tr = forward(inst.z, inst.windows[0], inst.params, inst.adj, 0.0, false);
    ParamGrads g = backward(tr, tr.y_hat, inst.params, inst.z);  // y == y_hat
    auto gv = grad_views(g);
    for (const auto& view : gv) {
        for (std::size_t i = 0; i < view.size; ++i) CHECK(view.data[i] == 0.0);
    }
}

TEST_CASE("readout gradient is linear in the residual") {
    SmallInstance inst = make_instance(4, 3, 5, 6, 2, 1, 99);
    const ForwardTrace tr = forward(inst.z, inst.windows[0], inst.params, inst.adj, 0.0, false);
    const double y1 = tr.y_hat - 0.5;   // residual 0.5
    const double y2 = tr.y_hat - 1.0;   // residual 1.0
    const ParamGrads g1 = backward(tr, y1, inst.params, inst.z);
    const ParamGrads g2 = backward(tr, y2, inst.params, inst.z);
    for (std::size_t h = 0; h < g1.readout_w.size(); ++h) {
        CHECK(g2.readout_w[h] == doctest::Approx(2.0 * g1.readout_w[h]).epsilon(1e-12));
    }
    CHECK(g2.readout_b == doctest::Approx(2.0 * g1.readout_b).epsilon(1e-12));
}

TEST_CASE("adam leaves parameters unchanged on zero gradients") {
    Vec p = {1.0, -2.0, 3.0};
    Vec g = {0.0, 0.0, 0.0};
    std::vector<TensorView> pv = {{"p", p.data(), p.size()}};
    std::vector<TensorView> gv = {{"g", g.data(), g.size()}};
    AdamState st = AdamState::init(pv);
    adam_step(pv, gv, st, 0.001);
    CHECK(p == Vec{1.0, -2.0, 3.0});
    CHECK(st.step == 1);
}

TEST_CASE("adam first step matches the textbook recurrence") {
    double p = 0.7;
    double g = 1.0;
    std::vector<TensorView> pv = {{"p", &p, 1}};
    std::vector<TensorView> gv = {{"g", &g, 1}};
    AdamState st = AdamState::init(pv);
    adam_step(pv, gv, st, 0.001);

    // by hand: m = 0.1, v = 0.001, m_hat = 1, v_hat = 1
    const double want = 0.7 - 0.001 * 1.0 / (std::sqrt(1.0) + 1e-8);
    CHECK(p == doctest::Approx(want).epsilon(1e-15));

    // identical tensors with identical gradients update identically
    double p1 = -0.4, p2 = -0.4, g12 = 0.3;
    std::vector<TensorView> pv2 = {{"a", &p1, 1}, {"b", &p2, 1}};
    std::vector<TensorView> gv2 = {{"a", &g12, 1}, {"b", &g12, 1}};
    AdamState st2 = AdamState::init(pv2);
    adam_step(pv2, gv2, st2, 0.01);
    CHECK(p1 == p2);
}

TEST_CASE("adam aborts on non-finite gradients naming the tensor") {
    double p = 0.0;
    double g = std::nan("");
    std::vector<TensorView> pv = {{"theta_w", &p, 1}};
    std::vector<TensorView> gv = {{"theta_w", &g, 1}};
    AdamState st = AdamState::init(pv);
    CHECK_THROWS_WITH_AS(adam_step(pv, gv, st, 0.001), doctest::Contains("theta_w"),
                         std::runtime_error);
}

TEST_CASE("plain gradient descent on the readout tail is non-increasing") {
    // convex in the readout parameters with everything else frozen
    SmallInstance inst = make_instance(5, 3, 6, 8, 2, 8, 2020);
    double prev = batch_loss(inst, inst.z, inst.params);
    const double lr = 1e-4;
    for (int step = 0; step < 50; ++step) {
        const ParamGrads g = batch_gradient(inst, inst.z, inst.params);
        for (std::size_t h = 0; h < inst.params.readout_w.size(); ++h) {
            inst.params.readout_w[h] -= lr * g.readout_w[h];
        }
        inst.params.readout_b -= lr * g.readout_b;
        const double now = batch_loss(inst, inst.z, inst.params);
        CHECK(now <= prev + 1e-12);
        prev = now;
    }
}

TEST_CASE("train is deterministic under a fixed seed") {
    const SynthSpec spec{4, 160, {1, 2}, 2, 0.01, "linear", 3};
    const SynthResult data = generate_synth(spec);

    TrainConfig cfg;
    cfg.embedding_dim = 6;
    cfg.batch_size = 16;
    cfg.hidden_width = 12;
    cfg.window = 8;
    cfg.max_epochs = 6;
    cfg.patience = 6;
    cfg.k = 2;
    cfg.seed = 11;
    cfg.dropout = 0.2;

    const TrainResult a = train(data.ds, cfg, 4);
    const TrainResult b = train(data.ds, cfg, 4);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e) {
        CHECK(a.history[e].train_mse == b.history[e].train_mse);
        CHECK(a.history[e].val_mse == b.history[e].val_mse);
    }
    CHECK(checkpoint_to_json(a.checkpoint) == checkpoint_to_json(b.checkpoint));
}

TEST_CASE("per-batch refresh and symmetric graphs train deterministically") {
    const SynthSpec spec{4, 140, {1, 2}, 2, 0.01, "linear", 6};
    const SynthResult data = generate_synth(spec);

    TrainConfig cfg;
    cfg.embedding_dim = 6;
    cfg.batch_size = 16;
    cfg.hidden_width = 12;
    cfg.window = 8;
    cfg.max_epochs = 4;
    cfg.patience = 4;
    cfg.k = 1;
    cfg.seed = 13;
    cfg.graph_refresh = GraphRefresh::PerBatch;
    cfg.symmetric_graph = true;

    const TrainResult a = train(data.ds, cfg, 4);
    const TrainResult b = train(data.ds, cfg, 4);
    CHECK(checkpoint_to_json(a.checkpoint) == checkpoint_to_json(b.checkpoint));
    CHECK(a.checkpoint.config.symmetric_graph);

    // the symmetric flag survives a save/load round trip
    const auto samples = windows_for_split(data.ds, a.checkpoint, "test");
    CHECK_NOTHROW(evaluate(a.checkpoint, samples));
}

TEST_CASE("early stopping keeps the best-validation checkpoint") {
    const SynthSpec spec{4, 200, {1}, 2, 0.02, "linear", 9};
    const SynthResult data = generate_synth(spec);

    TrainConfig cfg;
    cfg.embedding_dim = 6;
    cfg.batch_size = 16;
    cfg.hidden_width = 12;
    cfg.window = 8;
    cfg.max_epochs = 30;
    cfg.patience = 3;
    cfg.k = 2;
    cfg.seed = 4;
    cfg.dropout = 0.0;

    const TrainResult result = train(data.ds, cfg, 4);
    double best = result.history.front().val_mse;
    std::size_t best_epoch = 1;
    for (const auto& row : result.history) {
        if (row.val_mse < best) {
            best = row.val_mse;
            best_epoch = row.epoch;
        }
    }
    CHECK(result.best_epoch == best_epoch);
    CHECK(result.best_val_mse == best);
    if (result.history.size() < cfg.max_epochs) {
        // stopped early: the tail after the best epoch is exactly `patience` long
        CHECK(result.history.size() == best_epoch + cfg.patience);
    }

    // the returned checkpoint reproduces the best validation MSE
    const ProcessDataset normalized = apply_normalizer(data.ds, result.checkpoint.stats);
    const auto samples = make_windows(normalized, 4, cfg.window);
    const SampleSplit split = split_chronological(samples, cfg.fractions);
    const Adjacency adj = learn_graph(result.checkpoint.z, cfg.k).adj;
    double ss = 0.0;
    for (const auto& s : split.val) {
        const double y_hat =
            forward(result.checkpoint.z, s.x, result.checkpoint.params, adj, 0.0, false).y_hat;
        ss += (y_hat - s.y) * (y_hat - s.y);
    }
    CHECK(ss / split.val.size() == doctest::Approx(result.best_val_mse).epsilon(1e-12));
}

TEST_CASE("train aborts with context when the loss blows up") {
    const SynthSpec spec{4, 120, {1}, 2, 0.01, "linear", 5};
    const SynthResult data = generate_synth(spec);
    TrainConfig cfg;
    cfg.embedding_dim = 4;
    cfg.batch_size = 8;
    cfg.hidden_width = 8;
    cfg.window = 6;
    cfg.max_epochs = 50;
    cfg.patience = 50;
    cfg.k = 2;
    cfg.seed = 1;
    cfg.dropout = 0.0;
    cfg.learning_rate = 1e300;  // guaranteed overflow within an epoch or two
    CHECK_THROWS_WITH_AS(train(data.ds, cfg, 4), doctest::Contains("epoch"), std::runtime_error);
}

TEST_CASE("evaluate is repeatable and exposes denormalized predictions") {
    const SynthSpec spec{4, 200, {1, 2}, 2, 0.005, "linear", 21};
    const SynthResult data = generate_synth(spec);
    TrainConfig cfg;
    cfg.embedding_dim = 8;
    cfg.batch_size = 16;
    cfg.hidden_width = 16;
    cfg.window = 8;
    cfg.max_epochs = 40;
    cfg.patience = 40;
    cfg.k = 3;
    cfg.seed = 2;
    cfg.dropout = 0.0;
    cfg.learning_rate = 0.003;

    const TrainResult result = train(data.ds, cfg, 4);
    const auto samples = windows_for_split(data.ds, result.checkpoint, "test");
    const EvalResult e1 = evaluate(result.checkpoint, samples);
    const EvalResult e2 = evaluate(result.checkpoint, samples);
    CHECK(e1.report.nrmse == e2.report.nrmse);
    CHECK(e1.report.r2 == e2.report.r2);
    REQUIRE(e1.predictions.size() == samples.size());

    // predictions are on the raw target scale
    const double y_min = result.checkpoint.stats.min[4];
    const double y_max = result.checkpoint.stats.max[4];
    for (const auto& p : e1.predictions) {
        CHECK(p.y_true >= y_min - (y_max - y_min));
        CHECK(p.y_true <= y_max + (y_max - y_min));
    }

    // threaded evaluation is bit-identical
    const EvalResult e4 = evaluate(result.checkpoint, samples, 4);
    CHECK(e4.report.nrmse == e1.report.nrmse);
    for (std::size_t i = 0; i < e1.predictions.size(); ++i) {
        CHECK(e4.predictions[i].y_hat == e1.predictions[i].y_hat);
    }
}

TEST_CASE("windows_for_split validates the dataset against the checkpoint") {
    const SynthSpec spec{4, 150, {1}, 2, 0.01, "linear", 31};
    const SynthResult data = generate_synth(spec);
    TrainConfig cfg;
    cfg.embedding_dim = 4;
    cfg.batch_size = 8;
    cfg.hidden_width = 8;
    cfg.window = 6;
    cfg.max_epochs = 2;
    cfg.patience = 2;
    cfg.k = 2;
    cfg.seed = 3;

    const TrainResult result = train(data.ds, cfg, 4);

    const SynthSpec other{6, 150, {1}, 2, 0.01, "linear", 31};
    const SynthResult wrong = generate_synth(other);
    CHECK_THROWS_AS(windows_for_split(wrong.ds, result.checkpoint, "test"), ShapeError);
    CHECK_THROWS_AS(windows_for_split(data.ds, result.checkpoint, "bogus"), ConfigError);

    const auto all = windows_for_split(data.ds, result.checkpoint, "all");
    CHECK(all.size() == 150 - cfg.window);
}
