#include "vatd/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vatd/rng.hpp"

namespace vatd {

Strategy parse_strategy(const std::string& name) {
    if (name == "vat_d") return Strategy::vat_d;
    if (name == "uniform") return Strategy::uniform;
    if (name == "argmax") return Strategy::argmax;
    if (name == "sampling") return Strategy::sampling;
    throw std::invalid_argument("unknown strategy: " + name);
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::vat_d: return "vat_d";
        case Strategy::uniform: return "uniform";
        case Strategy::argmax: return "argmax";
        case Strategy::sampling: return "sampling";
    }
    throw std::invalid_argument("unknown strategy value");
}

void PerturbationConfig::validate() const {
    if (tau <= 0.0 || tau > 1.0) {
        throw std::invalid_argument("perturbation config: tau out of (0, 1]");
    }
    if (k < 1) {
        throw std::invalid_argument("perturbation config: k must be >= 1");
    }
    if (T <= 0.0) {
        throw std::invalid_argument("perturbation config: T must be positive");
    }
    if (S < 0) {
        throw std::invalid_argument("perturbation config: S must be >= 0");
    }
}

std::vector<int> select_indexes(int M, double tau, std::mt19937_64& rng) {
    if (M < 1) {
        throw std::invalid_argument("select_indexes: M must be >= 1");
    }
    const int n = perturbation_budget(M, tau);
    std::vector<int> pool(static_cast<size_t>(M));
    std::iota(pool.begin(), pool.end(), 0);
    // partial Fisher-Yates: the first n slots become the sample
    for (int i = 0; i < n; ++i) {
        const int j =
            i + static_cast<int>(uniform_below(rng, static_cast<uint64_t>(M - i)));
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
    }
    pool.resize(static_cast<size_t>(n));
    std::sort(pool.begin(), pool.end());
    return pool;
}

Vec replacement_scores(const Vec& g_m, const Matrix& E, int32_t x_m) {
    if (static_cast<int>(g_m.size()) != E.cols) {
        throw std::invalid_argument("replacement_scores: gradient width");
    }
    if (x_m < 0 || x_m >= E.rows) {
        throw std::invalid_argument("replacement_scores: token id out of range");
    }
    const double base = dot(E[x_m], g_m.data(), E.cols);
    Vec scores(static_cast<size_t>(E.rows));
    for (int v = 0; v < E.rows; ++v) {
        scores[static_cast<size_t>(v)] = dot(E[v], g_m.data(), E.cols) - base;
    }
    scores[static_cast<size_t>(x_m)] = 0.0;
    return scores;
}

int select_candidate(Strategy strategy, const CandidateSet& candidates,
                     const Vec& scores, std::mt19937_64& rng) {
    const size_t n = candidates.token_ids.size();
    if (n == 0) {
        throw std::invalid_argument("select_candidate: empty candidate set");
    }
    if (scores.size() != n) {
        throw std::invalid_argument("select_candidate: score length mismatch");
    }
    switch (strategy) {
        case Strategy::vat_d: {
            size_t best = 0;
            for (size_t i = 1; i < n; ++i) {
                if (scores[i] > scores[best] ||
                    (scores[i] == scores[best] &&
                     candidates.token_ids[i] < candidates.token_ids[best])) {
                    best = i;
                }
            }
            return static_cast<int>(best);
        }
        case Strategy::uniform:
            return static_cast<int>(uniform_below(rng, n));
        case Strategy::argmax:
            return 0;
        case Strategy::sampling: {
            Distribution p = softmax(candidates.log_probs);
            const double u = uniform_double(rng);
            double acc = 0.0;
            for (size_t i = 0; i < n; ++i) {
                acc += p[static_cast<int>(i)];
                if (u < acc) return static_cast<int>(i);
            }
            return static_cast<int>(n - 1);
        }
    }
    throw std::invalid_argument("select_candidate: unknown strategy");
}

Perturbation va_tr(const ClassifierParams& clf, const MLMParams& mlm,
                   const Sentence& x, const std::vector<int>& indexes,
                   const PerturbationConfig& cfg,
                   std::mt19937_64& strategy_rng) {
    cfg.validate();
    if (indexes.empty()) {
        throw std::invalid_argument("va_tr: no positions to perturb");
    }
    for (int m : indexes) {
        if (m < 0 || m >= x.length()) {
            throw std::invalid_argument("va_tr: index out of range");
        }
    }

    Perturbation out;
    out.original = x;
    out.indexes = indexes;
    std::sort(out.indexes.begin(), out.indexes.end());

    ForwardTrace tr = classifier_forward(clf, x);
    out.sharpened_target = sharpen(tr.probs, cfg.T);
    out.kl_before = kl_divergence(out.sharpened_target, tr.probs);

    // the one backward pass: every position's gradient in a single sweep
    std::vector<Vec> grads = input_gradients(clf, x, out.sharpened_target);

    out.perturbed = x;
    for (int m : out.indexes) {
        const int32_t x_m = x.ids[static_cast<size_t>(m)];
        CandidateSet cands = top_k_candidates(mlm, x, m, cfg.k, x_m);
        if (cands.token_ids.empty()) {
            throw std::runtime_error("va_tr: no replacement candidates");
        }
        Vec table = replacement_scores(grads[static_cast<size_t>(m)], clf.E, x_m);
        Vec cand_scores(cands.token_ids.size());
        for (size_t i = 0; i < cands.token_ids.size(); ++i) {
            cand_scores[i] = table[static_cast<size_t>(cands.token_ids[i])];
        }
        const int pick =
            select_candidate(cfg.strategy, cands, cand_scores, strategy_rng);
        const int32_t chosen = cands.token_ids[static_cast<size_t>(pick)];

        out.perturbed.ids[static_cast<size_t>(m)] = chosen;
        out.chosen_tokens.push_back(chosen);
        out.chosen_ranks.push_back(pick);
        out.chosen_scores.push_back(cand_scores[static_cast<size_t>(pick)]);
        out.candidates.push_back(std::move(cands));
        out.gradients.push_back(grads[static_cast<size_t>(m)]);
        out.score_table.push_back(std::move(table));
    }

    out.kl_after = kl_divergence(out.sharpened_target,
                                 classifier_forward(clf, out.perturbed).probs);
    return out;
}

Vec brute_force_oracle(const ClassifierParams& clf, const Sentence& x, int m,
                       const std::vector<int32_t>& candidate_ids, double T) {
    if (m < 0 || m >= x.length()) {
        throw std::invalid_argument("brute_force_oracle: position out of range");
    }
    const Distribution q = sharpen(classifier_forward(clf, x).probs, T);
    Vec out;
    out.reserve(candidate_ids.size());
    Sentence probe = x;
    for (int32_t v : candidate_ids) {
        probe.ids[static_cast<size_t>(m)] = v;
        out.push_back(kl_divergence(q, classifier_forward(clf, probe).probs));
    }
    return out;
}

}  // namespace vatd
