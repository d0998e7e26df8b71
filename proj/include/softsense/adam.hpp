#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "softsense/matrix.hpp"

namespace softsense {

// Named view over one flat parameter tensor, so the optimizer and the
// gradient checker can walk every trainable value uniformly.
struct TensorView {
    std::string name;
    double* data = nullptr;
    std::size_t size = 0;
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<Vec> m;  // first moments, parallel to the view list
    std::vector<Vec> v;  // second moments
    long step = 0;
    AdamConfig cfg;

    static AdamState init(const std::vector<TensorView>& views, AdamConfig cfg = {});
};

// Standard bias-corrected Adam update over matching view lists. Aborts with
// the tensor's name on a non-finite gradient entry.
void adam_step(const std::vector<TensorView>& params, const std::vector<TensorView>& grads,
               AdamState& state, double lr);

}  // namespace softsense
