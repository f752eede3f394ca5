#pragma once

#include <random>
#include <string>
#include <vector>

#include "vatd/classifier.hpp"
#include "vatd/mlm.hpp"
#include "vatd/numerics.hpp"
#include "vatd/text.hpp"

namespace vatd {

enum class Strategy {
    vat_d,     // argmax of the first-order adversarial score
    uniform,   // uniform over the candidate set
    argmax,    // highest MLM probability
    sampling,  // sample proportional to MLM probability
};

Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy s);

struct PerturbationConfig {
    double tau = 0.25;
    int k = 10;
    double T = 0.5;
    Strategy strategy = Strategy::vat_d;
    int S = 3;
    uint64_t seed = 0;

    void validate() const;
};

struct Perturbation {
    Sentence original;
    Sentence perturbed;
    Distribution sharpened_target;        // q = sharpen(p(.|original), T)
    std::vector<int> indexes;             // perturbed positions, ascending
    std::vector<int32_t> chosen_tokens;   // per index
    std::vector<int> chosen_ranks;        // index into the candidate set used
    Vec chosen_scores;                    // adversarial score of the choice
    std::vector<CandidateSet> candidates; // the initial top-k sets, per index
    std::vector<Vec> gradients;           // g_{x_m}, per index
    std::vector<Vec> score_table;         // full-vocab scores vs original, per index
    double kl_before = 0.0;               // KL(q || p(original))
    double kl_after = 0.0;                // KL(q || p(perturbed))
    Vec ppl_trace;                        // pseudo-perplexity after va_tr, then per step
};

// Random subset of {0..M-1} of size perturbation_budget(M, tau), ascending.
std::vector<int> select_indexes(int M, double tau, std::mt19937_64& rng);

// score(v) = (E[v] - E[x_m]) . g_m for every v in the vocabulary.
Vec replacement_scores(const Vec& g_m, const Matrix& E, int32_t x_m);

// Picks a candidate according to the strategy; returns its index in the set
// (which, by the sort order, is its MLM rank). scores holds the adversarial
// score per candidate. rng is consumed only by uniform and sampling.
int select_candidate(Strategy strategy, const CandidateSet& candidates,
                     const Vec& scores, std::mt19937_64& rng);

// One round of simultaneous virtual adversarial token replacement at the
// given positions. Costs a single backward pass plus forward passes;
// gradients and the full-vocab score tables are cached in the result for
// later refinement.
Perturbation va_tr(const ClassifierParams& clf, const MLMParams& mlm,
                   const Sentence& x, const std::vector<int>& indexes,
                   const PerturbationConfig& cfg, std::mt19937_64& strategy_rng);

// True sharpened-consistency divergence per candidate via full forward
// passes. Verification oracle for the linear score.
Vec brute_force_oracle(const ClassifierParams& clf, const Sentence& x, int m,
                       const std::vector<int32_t>& candidate_ids, double T);

}  // namespace vatd
