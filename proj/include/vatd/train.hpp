#pragma once

#include <cstdint>
#include <vector>

#include "vatd/classifier.hpp"
#include "vatd/data_synth.hpp"
#include "vatd/mlm.hpp"
#include "vatd/perturb.hpp"

namespace vatd {

struct TrainingConfig {
    double lr = 2e-3;
    int total_steps = 1000;
    int labeled_batch = 8;
    int unlabeled_batch = 24;
    PerturbationConfig perturbation;
    bool use_consistency = true;
    bool tsa_enabled = true;
    int eval_every = 100;
    uint64_t seed = 0;
    // classifier dims
    int d = 32;
    int d_a = 16;
    int h = 64;

    void validate() const;
};

struct EvalRecord {
    int step = 0;
    double ce_loss = 0.0;            // mean supervised CE since last eval
    double consistency_loss = 0.0;   // mean KL(q || p(perturbed)) since last eval
    double tsa_kept_fraction = 0.0;
    double dev_accuracy = 0.0;
    double mean_kl_adv = 0.0;        // same statistic as consistency_loss
    double mean_kl_uniform_probe = 0.0;
    std::vector<int64_t> chosen_rank_histogram;  // cumulative, size k
};

struct MetricsLog {
    std::vector<EvalRecord> records;
};

struct TrainResult {
    ClassifierParams best_params;
    double best_dev_accuracy = 0.0;
    int best_step = 0;
    MetricsLog log;
};

// KL(q || p) with q treated as a constant target.
double consistency_loss(const Distribution& q_sharp,
                        const Distribution& perturbed_prediction);

// Linear annealing threshold from 1/C at step 0 to 1 at total_steps.
double tsa_threshold(int step, int total_steps, int C);

// Mean cross-entropy over the examples whose true-class probability is
// still <= eta; confident examples drop out of the gradient. Returns the
// loss; gradients (already divided by the kept count) accumulate into
// grads when given.
double supervised_loss_with_tsa(const ClassifierParams& params,
                                const std::vector<LabeledExample>& batch,
                                double eta, ClassifierGradients* grads,
                                double* kept_fraction);

// Argmax accuracy; ties resolve to the lower class id.
double evaluate(const ClassifierParams& params,
                const std::vector<LabeledExample>& dataset);

// The full semi-supervised loop: supervised CE with annealing plus the
// consistency term on adversarially perturbed inputs, equal weight, Adam.
// When unlabeled is empty and consistency is on, the labeled sentences feed
// the consistency term instead. mlm may be null only when consistency is
// off. Tracks the best dev accuracy seen at eval points.
TrainResult train(const TrainingConfig& config, int vocab_size,
                  const std::vector<LabeledExample>& labeled,
                  const std::vector<Sentence>& unlabeled,
                  const std::vector<LabeledExample>& dev,
                  const MLMParams* mlm);

}  // namespace vatd
