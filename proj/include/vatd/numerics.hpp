#pragma once

#include <functional>

#include "vatd/matrix.hpp"

namespace vatd {

// Probabilities below this are clamped before any log; keeps KL finite when a
// model assigns (numerically) zero mass to something the target cares about.
inline constexpr double kProbFloor = 1e-12;

struct Distribution {
    Vec p;

    int size() const { return static_cast<int>(p.size()); }
    double operator[](int i) const { return p[static_cast<size_t>(i)]; }
};

// Stable softmax over raw scores. Throws std::invalid_argument on empty input
// or non-finite entries.
Distribution softmax(const Vec& logits);

// p^(1/T) renormalized. T == 1 returns the input unchanged; T <= 0 is an
// error. Computed in log space so small T does not underflow to all zeros.
Distribution sharpen(const Distribution& p, double temperature);

// KL(p || q) with q floored at kProbFloor. Terms with p_i == 0 contribute
// zero. Dimension mismatch is an error.
double kl_divergence(const Distribution& p, const Distribution& q);

double entropy(const Distribution& p);

// Max relative error between analytic gradient and central finite
// differences of f at x. Relative error uses max(|a|, |b|, 1e-8) as the
// denominator so near-zero components do not blow up the ratio.
double grad_check(const std::function<double(const Vec&)>& f, const Vec& x,
                  const Vec& analytic, double eps = 1e-5);

}  // namespace vatd
