#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vatd/matrix.hpp"

namespace vatd {

// Adam with the usual defaults. State is one flat moment pair covering all
// parameter tensors, addressed in the same order every step.
struct AdamState {
    Vec m;
    Vec v;
    int64_t t = 0;

    explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

// One update over matching lists of parameter and gradient spans. Span
// layouts must be identical between calls for the state to make sense.
void adam_update(const std::vector<std::span<double>>& params,
                 const std::vector<std::span<const double>>& grads,
                 AdamState& state, double lr);

}  // namespace vatd
