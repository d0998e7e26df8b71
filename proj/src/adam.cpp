#include "softsense/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "softsense/errors.hpp"

namespace softsense {

AdamState AdamState::init(const std::vector<TensorView>& views, AdamConfig cfg) {
    AdamState st;
    st.cfg = cfg;
    st.m.reserve(views.size());
    st.v.reserve(views.size());
    for (const auto& view : views) {
        st.m.emplace_back(view.size, 0.0);
        st.v.emplace_back(view.size, 0.0);
    }
    return st;
}

void adam_step(const std::vector<TensorView>& params, const std::vector<TensorView>& grads,
               AdamState& state, double lr) {
    if (lr <= 0.0) throw ConfigError("adam_step: learning rate must be positive");
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ShapeError("adam_step: parameter/gradient/state tensor counts differ");
    }
    ++state.step;
    const double b1 = state.cfg.beta1;
    const double b2 = state.cfg.beta2;
    const double mc = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double vc = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (params[t].size != grads[t].size) {
            throw ShapeError("adam_step: size mismatch for tensor '" + params[t].name + "'");
        }
        double* p = params[t].data;
        const double* g = grads[t].data;
        Vec& m = state.m[t];
        Vec& v = state.v[t];
        for (std::size_t i = 0; i < params[t].size; ++i) {
            if (!std::isfinite(g[i])) {
                throw std::runtime_error("adam_step: non-finite gradient in tensor '" +
                                         params[t].name + "' at entry " + std::to_string(i));
            }
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double m_hat = m[i] / mc;
            const double v_hat = v[i] / vc;
            p[i] -= lr * m_hat / (std::sqrt(v_hat) + state.cfg.epsilon);
        }
    }
}

}  // namespace softsense
