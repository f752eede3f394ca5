#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vatd/matrix.hpp"
#include "vatd/numerics.hpp"
#include "vatd/text.hpp"

namespace vatd {

// Context-window token predictor: estimates p(x_m | 2w surrounding tokens).
// The center position is structurally outside its own context, so scoring a
// sentence never requires masking anything out. Frozen once trained.
struct MLMParams {
    int vocab_size = 0;
    int d_m = 0;  // embedding width
    int h_m = 0;  // hidden width
    int w = 0;    // window half-width
    uint64_t seed = 0;

    Matrix E_m;  // vocab_size x d_m (pad row trains: it is the boundary vector)
    Matrix W_c;  // h_m x (2w * d_m)
    Vec b_c;     // h_m
    Matrix W_o;  // vocab_size x h_m
    Vec b_o;     // vocab_size

    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;
    size_t parameter_count() const;
};

struct CandidateSet {
    int position = 0;
    std::vector<int32_t> token_ids;  // sorted by (log_prob desc, id asc)
    Vec log_probs;
};

struct MLMTrainConfig {
    int d_m = 32;
    int h_m = 64;
    int window = 3;
    int epochs = 5;
    double lr = 1e-3;
    int batch_size = 32;
    uint64_t seed = 0;
};

MLMParams init_mlm(int vocab_size, const MLMTrainConfig& cfg);

// Cross-entropy training over every (sentence, position) pair, minibatch
// Adam, per-epoch reshuffle. epoch_losses, when given, receives one mean
// loss per epoch.
MLMParams train_mlm(const std::vector<Sentence>& corpus, int vocab_size,
                    const MLMTrainConfig& cfg,
                    std::vector<double>* epoch_losses = nullptr);

// Distribution over the vocabulary for position m given its context window.
Distribution mlm_predict(const MLMParams& mlm, const Sentence& sentence, int m);

// ln p(token at m | context), clamped below at kProbFloor.
double mlm_log_prob(const MLMParams& mlm, const Sentence& sentence, int m,
                    int32_t token);

// The k most probable tokens at m, excluding `exclude` (the sentence's
// original token there) and the pad token. k must be < |V|.
CandidateSet top_k_candidates(const MLMParams& mlm, const Sentence& sentence,
                              int m, int k, int32_t exclude);

// exp(mean over positions of -ln p(x_m | context)).
double pseudo_perplexity(const MLMParams& mlm, const Sentence& sentence);

void save_mlm(const MLMParams& mlm, const std::string& path);
MLMParams load_mlm(const std::string& path);

}  // namespace vatd
