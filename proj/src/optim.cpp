#include "vatd/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace vatd {

void adam_update(const std::vector<std::span<double>>& params,
                 const std::vector<std::span<const double>>& grads,
                 AdamState& state, double lr) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam_update: tensor list mismatch");
    }
    size_t total = 0;
    for (size_t i = 0; i < params.size(); ++i) {
        if (params[i].size() != grads[i].size()) {
            throw std::invalid_argument("adam_update: tensor shape mismatch");
        }
        total += params[i].size();
    }
    if (total != state.m.size()) {
        throw std::invalid_argument("adam_update: state size mismatch");
    }

    ++state.t;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));

    size_t off = 0;
    for (size_t i = 0; i < params.size(); ++i) {
        auto p = params[i];
        auto g = grads[i];
        for (size_t j = 0; j < p.size(); ++j) {
            const size_t k = off + j;
            state.m[k] = kAdamBeta1 * state.m[k] + (1.0 - kAdamBeta1) * g[j];
            state.v[k] = kAdamBeta2 * state.v[k] + (1.0 - kAdamBeta2) * g[j] * g[j];
            const double mhat = state.m[k] / bc1;
            const double vhat = state.v[k] / bc2;
            p[j] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
        }
        off += p.size();
    }
}

}  // namespace vatd
