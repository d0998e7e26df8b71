#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softsense/adam.hpp"
#include "softsense/checkpoint.hpp"
#include "softsense/dataset.hpp"
#include "softsense/graph.hpp"
#include "softsense/metrics.hpp"
#include "softsense/model.hpp"

namespace softsense {

// Gradients of the squared error of one sample with respect to every
// trainable tensor, embedding table included.
struct ParamGrads {
    Matrix z;
    Matrix w;
    Vec a;
    Matrix theta_w;
    Vec theta_b;
    Vec readout_w;
    double readout_b = 0.0;

    static ParamGrads zeros(std::size_t n, std::size_t d, std::size_t window, std::size_t hidden);
    void add(const ParamGrads& other);
    void scale(double s);
};

// Exact reverse-mode gradients of (y_hat - y)^2 through the readout, the
// hidden layer, the gating, the aggregation, the softmax/LeakyReLU attention
// and the shared projection. The embedding table receives gradients through
// the feature concatenation and the readout gating only; the top-k adjacency
// is treated as constant.
ParamGrads backward(const ForwardTrace& trace, double y, const ModelParams& params,
                    const Matrix& z);

// Uniform optimizer views over (Z, W, a, theta, readout); order matches
// grad_views so the two lists zip.
std::vector<TensorView> trainable_views(Matrix& z, ModelParams& params);
std::vector<TensorView> grad_views(ParamGrads& grads);

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double train_mse = 0.0;
    double val_mse = 0.0;
    double lr = 0.0;
    double wall_s = 0.0;
};

struct TrainResult {
    Checkpoint checkpoint;  // parameters at the best validation epoch
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0;
    double best_val_mse = 0.0;
};

// Full pipeline: fit min-max stats on the training rows, window the
// normalized data, split chronologically, run Adam with the configured graph
// refresh cadence, stop early on stalled validation MSE.
TrainResult train(const ProcessDataset& ds, const TrainConfig& cfg, std::size_t target_index);

struct Prediction {
    std::size_t t_index = 0;
    double y_true = 0.0;  // denormalized
    double y_hat = 0.0;   // denormalized
};

struct EvalResult {
    MetricsReport report;
    std::vector<Prediction> predictions;
};

// Evaluates normalized samples with dropout off; metrics and predictions are
// reported on the original (denormalized) scale of the target variable.
EvalResult evaluate(const Checkpoint& ckpt, const std::vector<WindowSample>& samples,
                    std::size_t threads = 1);

// Normalizes a raw dataset with the checkpoint's stats (validating tags and
// variable count) and returns the windows of the requested split:
// "train" | "val" | "test" | "all".
std::vector<WindowSample> windows_for_split(const ProcessDataset& raw, const Checkpoint& ckpt,
                                            const std::string& split);

// epoch,train_mse,val_mse,lr,wall_time
void save_history_csv(const std::vector<EpochStats>& history, const std::string& path);

}  // namespace softsense
