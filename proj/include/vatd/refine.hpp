#pragma once

#include <random>
#include <vector>

#include "vatd/perturb.hpp"

namespace vatd {

// Linearly decaying per-step refinement sizes, mask-predict style.
struct RefinementSchedule {
    int n0 = 0;
    int S = 0;
    std::vector<int> counts;  // n_1..n_S
};

// n_s = max(1, ceil(n0 * (S - s + 1) / (S + 1))) for s = 1..S.
RefinementSchedule refinement_counts(int n0, int S);

// The n positions within I whose current tokens the MLM finds least likely.
// Ties break toward the lower position; result ascending.
std::vector<int> lowest_mlm_positions(const MLMParams& mlm, const Sentence& s,
                                      const std::vector<int>& I, int n);

// VA_TR followed by S refinement steps. Each step rescores the least fluent
// perturbed positions against candidate sets ranked by the sum of MLM
// log-probabilities under the perturbed and the original context, picking by
// the adversarial scores cached at VA_TR time. No backward passes happen
// after the initial one. ppl_trace holds the pseudo-perplexity after VA_TR
// and after each step.
Perturbation iterative_refinements(const ClassifierParams& clf,
                                   const MLMParams& mlm, const Sentence& x,
                                   const PerturbationConfig& cfg,
                                   std::mt19937_64& index_rng,
                                   std::mt19937_64& strategy_rng);

// The refinement passes applied to an existing VA_TR result, in place.
// Exposed separately so callers can share one VA_TR output across settings.
void refine_perturbation(const ClassifierParams& clf, const MLMParams& mlm,
                         Perturbation& p, const PerturbationConfig& cfg,
                         std::mt19937_64& strategy_rng);

}  // namespace vatd
