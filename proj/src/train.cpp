#include "vatd/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "vatd/optim.hpp"
#include "vatd/refine.hpp"
#include "vatd/rng.hpp"

namespace vatd {

void TrainingConfig::validate() const {
    if (lr <= 0.0) {
        throw std::invalid_argument("training config: lr must be positive");
    }
    if (total_steps < 1) {
        throw std::invalid_argument("training config: total_steps must be >= 1");
    }
    if (labeled_batch < 1 || unlabeled_batch < 1) {
        throw std::invalid_argument("training config: batch sizes must be >= 1");
    }
    if (eval_every < 1) {
        throw std::invalid_argument("training config: eval_every must be >= 1");
    }
    if (d < 1 || d_a < 1 || h < 1) {
        throw std::invalid_argument("training config: model dims must be >= 1");
    }
    if (use_consistency) {
        perturbation.validate();
    }
}

double consistency_loss(const Distribution& q_sharp,
                        const Distribution& perturbed_prediction) {
    return kl_divergence(q_sharp, perturbed_prediction);
}

double tsa_threshold(int step, int total_steps, int C) {
    if (C < 2) {
        throw std::invalid_argument("tsa_threshold: C must be >= 2");
    }
    if (step < 0 || total_steps < 1 || step > total_steps) {
        throw std::invalid_argument("tsa_threshold: step out of range");
    }
    const double base = 1.0 / C;
    return base + (1.0 - base) * (static_cast<double>(step) / total_steps);
}

double supervised_loss_with_tsa(const ClassifierParams& params,
                                const std::vector<LabeledExample>& batch,
                                double eta, ClassifierGradients* grads,
                                double* kept_fraction) {
    if (batch.empty()) {
        throw std::invalid_argument("supervised loss: empty batch");
    }
    std::vector<size_t> kept;
    for (size_t i = 0; i < batch.size(); ++i) {
        const auto& ex = batch[i];
        if (ex.label < 0 || ex.label >= params.C) {
            throw std::invalid_argument("supervised loss: label out of range");
        }
        const ForwardTrace tr = classifier_forward(params, ex.sentence);
        if (tr.probs[ex.label] <= eta) {
            kept.push_back(i);
        }
    }
    if (kept_fraction) {
        *kept_fraction =
            static_cast<double>(kept.size()) / static_cast<double>(batch.size());
    }
    if (kept.empty()) {
        return 0.0;
    }
    const double weight = 1.0 / static_cast<double>(kept.size());
    double loss = 0.0;
    for (size_t i : kept) {
        const auto& ex = batch[i];
        Distribution onehot;
        onehot.p.assign(static_cast<size_t>(params.C), 0.0);
        onehot.p[static_cast<size_t>(ex.label)] = 1.0;
        // KL(onehot || p) is exactly -ln p_true
        loss += classifier_backward(params, ex.sentence, onehot, weight,
                                    grads, nullptr);
    }
    return loss * weight;
}

double evaluate(const ClassifierParams& params,
                const std::vector<LabeledExample>& dataset) {
    if (dataset.empty()) {
        throw std::invalid_argument("evaluate: empty dataset");
    }
    int correct = 0;
    for (const auto& ex : dataset) {
        const ForwardTrace tr = classifier_forward(params, ex.sentence);
        int best = 0;
        for (int c = 1; c < params.C; ++c) {
            if (tr.probs[c] > tr.probs[best]) best = c;
        }
        correct += best == ex.label;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

namespace {

// endlessly cycling shuffled index stream
class BatchStream {
public:
    BatchStream(size_t n, std::mt19937_64 rng) : order_(n), rng_(std::move(rng)) {
        std::iota(order_.begin(), order_.end(), size_t{0});
        shuffle(order_, rng_);
    }

    size_t next() {
        if (at_ == order_.size()) {
            shuffle(order_, rng_);
            at_ = 0;
        }
        return order_[at_++];
    }

private:
    std::vector<size_t> order_;
    std::mt19937_64 rng_;
    size_t at_ = 0;
};

}  // namespace

TrainResult train(const TrainingConfig& config, int vocab_size,
                  const std::vector<LabeledExample>& labeled,
                  const std::vector<Sentence>& unlabeled,
                  const std::vector<LabeledExample>& dev,
                  const MLMParams* mlm) {
    config.validate();
    if (labeled.empty()) {
        throw std::invalid_argument("train: labeled set is empty");
    }
    if (dev.empty()) {
        throw std::invalid_argument("train: dev set is empty");
    }
    if (config.use_consistency && mlm == nullptr) {
        throw std::invalid_argument("train: consistency training requires an MLM");
    }

    int C = 0;
    for (const auto& ex : labeled) C = std::max(C, ex.label + 1);
    for (const auto& ex : dev) C = std::max(C, ex.label + 1);
    if (C < 2) {
        throw std::invalid_argument("train: need at least 2 classes");
    }

    ClassifierParams params = init_classifier(vocab_size, config.d, config.d_a,
                                              config.h, C, config.seed);
    AdamState adam(params.parameter_count());
    ClassifierGradients grads(params);

    // when no unlabeled pool exists, the labeled sentences carry the
    // consistency term
    std::vector<Sentence> fallback;
    const std::vector<Sentence>* consistency_pool = &unlabeled;
    if (config.use_consistency && unlabeled.empty()) {
        fallback.reserve(labeled.size());
        for (const auto& ex : labeled) fallback.push_back(ex.sentence);
        consistency_pool = &fallback;
    }

    BatchStream labeled_stream(labeled.size(),
                               make_rng(config.seed, "data/labeled"));
    BatchStream unlabeled_stream(
        consistency_pool->empty() ? 1 : consistency_pool->size(),
        make_rng(config.seed, "data/unlabeled"));
    auto index_rng = make_rng(config.seed, "index-selection");
    auto strategy_rng = make_rng(config.seed, "sampling-strategy");
    auto probe_rng = make_rng(config.seed, "uniform-probe");

    TrainResult result;
    result.best_dev_accuracy = -1.0;

    double sum_ce = 0.0, sum_cons = 0.0, sum_kept = 0.0;
    int steps_since_eval = 0;
    std::vector<int64_t> rank_hist(
        static_cast<size_t>(std::max(1, config.perturbation.k)), 0);

    for (int t = 1; t <= config.total_steps; ++t) {
        grads.zero();

        const double eta =
            config.tsa_enabled ? tsa_threshold(t - 1, config.total_steps, C)
                               : 1.0;
        std::vector<LabeledExample> batch;
        batch.reserve(static_cast<size_t>(config.labeled_batch));
        for (int i = 0; i < config.labeled_batch; ++i) {
            batch.push_back(labeled[labeled_stream.next()]);
        }
        double kept = 0.0;
        const double ce =
            supervised_loss_with_tsa(params, batch, eta, &grads, &kept);

        double cons = 0.0;
        std::vector<Perturbation> perturbations;
        if (config.use_consistency && !consistency_pool->empty()) {
            const double weight = 1.0 / config.unlabeled_batch;
            for (int i = 0; i < config.unlabeled_batch; ++i) {
                const Sentence& x = (*consistency_pool)[unlabeled_stream.next()];
                const std::vector<int> I =
                    select_indexes(x.length(), config.perturbation.tau, index_rng);
                Perturbation p = va_tr(params, *mlm, x, I, config.perturbation,
                                       strategy_rng);
                if (config.perturbation.S > 0) {
                    refine_perturbation(params, *mlm, p, config.perturbation,
                                        strategy_rng);
                }
                // gradient flows through the perturbed branch only; the
                // sharpened target is a constant
                cons += classifier_backward(params, p.perturbed,
                                            p.sharpened_target, weight, &grads,
                                            nullptr);
                for (int r : p.chosen_ranks) {
                    if (r >= 0 && r < static_cast<int>(rank_hist.size())) {
                        ++rank_hist[static_cast<size_t>(r)];
                    }
                }
                perturbations.push_back(std::move(p));
            }
            cons /= config.unlabeled_batch;
        }

        const double total = ce + cons;
        if (!std::isfinite(total)) {
            throw std::runtime_error("train: non-finite loss at step " +
                                     std::to_string(t));
        }
        sum_ce += ce;
        sum_cons += cons;
        sum_kept += kept;
        ++steps_since_eval;

        const bool is_eval =
            t % config.eval_every == 0 || t == config.total_steps;

        // probe against the same snapshot the adversarial picks saw:
        // re-draw uniformly from this step's candidate sets and measure the
        // divergence random picks would have caused
        double probe_kl = 0.0;
        if (is_eval && !perturbations.empty()) {
            for (const auto& p : perturbations) {
                Sentence alt = p.original;
                for (size_t i = 0; i < p.indexes.size(); ++i) {
                    const auto& ids = p.candidates[i].token_ids;
                    alt.ids[static_cast<size_t>(p.indexes[i])] =
                        ids[uniform_below(probe_rng, ids.size())];
                }
                probe_kl += kl_divergence(
                    p.sharpened_target, classifier_forward(params, alt).probs);
            }
            probe_kl /= static_cast<double>(perturbations.size());
        }

        classifier_train_step(params, grads, adam, config.lr);

        if (is_eval) {
            EvalRecord rec;
            rec.step = t;
            rec.ce_loss = sum_ce / steps_since_eval;
            rec.consistency_loss = sum_cons / steps_since_eval;
            rec.mean_kl_adv = rec.consistency_loss;
            rec.tsa_kept_fraction = sum_kept / steps_since_eval;
            rec.dev_accuracy = evaluate(params, dev);
            rec.chosen_rank_histogram = rank_hist;
            rec.mean_kl_uniform_probe = probe_kl;

            result.log.records.push_back(std::move(rec));
            sum_ce = sum_cons = sum_kept = 0.0;
            steps_since_eval = 0;

            const double acc = result.log.records.back().dev_accuracy;
            if (acc > result.best_dev_accuracy) {
                result.best_dev_accuracy = acc;
                result.best_step = t;
                result.best_params = params;
            }
        }
    }
    return result;
}

}  // namespace vatd
