#include "vatd/refine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vatd {

RefinementSchedule refinement_counts(int n0, int S) {
    if (n0 < 1) {
        throw std::invalid_argument("refinement_counts: n0 must be >= 1");
    }
    if (S < 0) {
        throw std::invalid_argument("refinement_counts: S must be >= 0");
    }
    RefinementSchedule sched;
    sched.n0 = n0;
    sched.S = S;
    for (int s = 1; s <= S; ++s) {
        const int num = n0 * (S - s + 1);
        const int n_s = (num + S) / (S + 1);  // ceil(num / (S+1))
        sched.counts.push_back(std::max(1, n_s));
    }
    return sched;
}

std::vector<int> lowest_mlm_positions(const MLMParams& mlm, const Sentence& s,
                                      const std::vector<int>& I, int n) {
    if (n < 1) {
        throw std::invalid_argument("lowest_mlm_positions: n must be >= 1");
    }
    std::vector<std::pair<double, int>> scored;
    scored.reserve(I.size());
    for (int m : I) {
        scored.emplace_back(
            mlm_log_prob(mlm, s, m, s.ids[static_cast<size_t>(m)]), m);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    const size_t take = std::min(static_cast<size_t>(n), scored.size());
    std::vector<int> out;
    out.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        out.push_back(scored[i].second);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void refine_perturbation(const ClassifierParams& clf, const MLMParams& mlm,
                         Perturbation& p, const PerturbationConfig& cfg,
                         std::mt19937_64& strategy_rng) {
    cfg.validate();
    p.ppl_trace.clear();
    p.ppl_trace.push_back(pseudo_perplexity(mlm, p.perturbed));
    if (cfg.S == 0 || p.indexes.empty()) {
        return;
    }

    // index of each perturbed position within the cached per-index arrays
    std::vector<int> slot_of(static_cast<size_t>(p.original.length()), -1);
    for (size_t i = 0; i < p.indexes.size(); ++i) {
        slot_of[static_cast<size_t>(p.indexes[i])] = static_cast<int>(i);
    }

    const RefinementSchedule sched =
        refinement_counts(static_cast<int>(p.indexes.size()), cfg.S);

    for (int n_s : sched.counts) {
        const std::vector<int> picked =
            lowest_mlm_positions(mlm, p.perturbed, p.indexes, n_s);
        // candidate scoring reads the step-start sentence; replacements
        // within a step land together
        const Sentence snapshot = p.perturbed;
        for (int m : picked) {
            const int slot = slot_of[static_cast<size_t>(m)];
            const int32_t original_tok =
                p.original.ids[static_cast<size_t>(m)];

            const Distribution from_perturbed = mlm_predict(mlm, snapshot, m);
            const Distribution from_original = mlm_predict(mlm, p.original, m);

            std::vector<int32_t> ids;
            ids.reserve(static_cast<size_t>(mlm.vocab_size));
            Vec summed(static_cast<size_t>(mlm.vocab_size));
            for (int32_t v = 0; v < mlm.vocab_size; ++v) {
                summed[static_cast<size_t>(v)] =
                    std::log(std::max(from_perturbed[v], kProbFloor)) +
                    std::log(std::max(from_original[v], kProbFloor));
                if (v == original_tok || v == Vocab::kPadId) continue;
                ids.push_back(v);
            }
            const size_t kk =
                std::min(static_cast<size_t>(cfg.k), ids.size());
            std::partial_sort(ids.begin(),
                              ids.begin() + static_cast<ptrdiff_t>(kk),
                              ids.end(), [&](int32_t a, int32_t b) {
                                  const double sa = summed[static_cast<size_t>(a)];
                                  const double sb = summed[static_cast<size_t>(b)];
                                  if (sa != sb) return sa > sb;
                                  return a < b;
                              });
            ids.resize(kk);
            if (ids.empty()) {
                throw std::runtime_error("refine: no replacement candidates");
            }

            CandidateSet cands;
            cands.position = m;
            cands.token_ids = std::move(ids);
            for (int32_t v : cands.token_ids) {
                cands.log_probs.push_back(summed[static_cast<size_t>(v)]);
            }

            const Vec& table = p.score_table[static_cast<size_t>(slot)];
            Vec cand_scores(cands.token_ids.size());
            for (size_t i = 0; i < cands.token_ids.size(); ++i) {
                cand_scores[i] =
                    table[static_cast<size_t>(cands.token_ids[i])];
            }
            const int pick = select_candidate(cfg.strategy, cands,
                                              cand_scores, strategy_rng);
            const int32_t chosen =
                cands.token_ids[static_cast<size_t>(pick)];

            p.perturbed.ids[static_cast<size_t>(m)] = chosen;
            p.chosen_tokens[static_cast<size_t>(slot)] = chosen;
            p.chosen_ranks[static_cast<size_t>(slot)] = pick;
            p.chosen_scores[static_cast<size_t>(slot)] =
                cand_scores[static_cast<size_t>(pick)];
        }
        p.ppl_trace.push_back(pseudo_perplexity(mlm, p.perturbed));
    }

    p.kl_after = kl_divergence(p.sharpened_target,
                               classifier_forward(clf, p.perturbed).probs);
}

Perturbation iterative_refinements(const ClassifierParams& clf,
                                   const MLMParams& mlm, const Sentence& x,
                                   const PerturbationConfig& cfg,
                                   std::mt19937_64& index_rng,
                                   std::mt19937_64& strategy_rng) {
    cfg.validate();
    const std::vector<int> I = select_indexes(x.length(), cfg.tau, index_rng);
    Perturbation p = va_tr(clf, mlm, x, I, cfg, strategy_rng);
    refine_perturbation(clf, mlm, p, cfg, strategy_rng);
    return p;
}

}  // namespace vatd
