#include "vatd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vatd {

Distribution softmax(const Vec& logits) {
    if (logits.empty()) {
        throw std::invalid_argument("softmax: empty input");
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logits) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("softmax: non-finite input");
        }
        mx = std::max(mx, v);
    }
    Distribution out;
    out.p.resize(logits.size());
    double z = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out.p[i] = std::exp(logits[i] - mx);
        z += out.p[i];
    }
    for (double& v : out.p) {
        v /= z;
    }
    return out;
}

Distribution sharpen(const Distribution& p, double temperature) {
    if (temperature <= 0.0) {
        throw std::invalid_argument("sharpen: temperature must be positive");
    }
    if (p.p.empty()) {
        throw std::invalid_argument("sharpen: empty distribution");
    }
    if (temperature == 1.0) {
        return p;
    }
    // work with l_i = ln(p_i) / T; exponentiating p_i^(1/T) directly
    // underflows for small T
    Vec l(p.p.size());
    for (size_t i = 0; i < p.p.size(); ++i) {
        l[i] = p.p[i] > 0.0 ? std::log(p.p[i]) / temperature
                            : -std::numeric_limits<double>::infinity();
    }
    double mx = *std::max_element(l.begin(), l.end());
    if (!std::isfinite(mx)) {
        throw std::invalid_argument("sharpen: distribution has no mass");
    }
    Distribution out;
    out.p.resize(l.size());
    double z = 0.0;
    for (size_t i = 0; i < l.size(); ++i) {
        out.p[i] = std::isfinite(l[i]) ? std::exp(l[i] - mx) : 0.0;
        z += out.p[i];
    }
    for (double& v : out.p) {
        v /= z;
    }
    return out;
}

double kl_divergence(const Distribution& p, const Distribution& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("kl_divergence: dimension mismatch");
    }
    double kl = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        const double pi = p[i];
        if (pi <= 0.0) continue;
        const double qi = std::max(q[i], kProbFloor);
        kl += pi * (std::log(pi) - std::log(qi));
    }
    return kl;
}

double entropy(const Distribution& p) {
    double h = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        const double pi = p[i];
        if (pi <= 0.0) continue;
        h -= pi * std::log(pi);
    }
    return h;
}

double grad_check(const std::function<double(const Vec&)>& f, const Vec& x,
                  const Vec& analytic, double eps) {
    if (x.size() != analytic.size()) {
        throw std::invalid_argument("grad_check: dimension mismatch");
    }
    double worst = 0.0;
    Vec xp = x;
    for (size_t i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + eps;
        const double fp = f(xp);
        xp[i] = x[i] - eps;
        const double fm = f(xp);
        xp[i] = x[i];
        const double numeric = (fp - fm) / (2.0 * eps);
        const double denom =
            std::max({std::fabs(numeric), std::fabs(analytic[i]), 1e-8});
        worst = std::max(worst, std::fabs(numeric - analytic[i]) / denom);
    }
    return worst;
}

}  // namespace vatd
