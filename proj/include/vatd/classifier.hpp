#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vatd/matrix.hpp"
#include "vatd/numerics.hpp"
#include "vatd/text.hpp"

namespace vatd {

// Small text classifier: embedding lookup, attention pooling, one hidden
// ReLU layer, softmax head. Attention pooling (rather than a mean) keeps the
// per-position input gradients distinct, which the replacement criterion
// depends on.
struct ClassifierParams {
    int vocab_size = 0;
    int d = 0;    // embedding width
    int d_a = 0;  // attention projection width
    int h = 0;    // hidden width
    int C = 0;    // classes
    uint64_t seed = 0;

    Matrix E;    // vocab_size x d, pad row pinned to zero
    Matrix W_a;  // d_a x d
    Vec b_a;     // d_a
    Vec v_a;     // d_a
    Matrix W_1;  // h x d
    Vec b_1;     // h
    Matrix W_2;  // C x h
    Vec b_2;     // C

    // tensors in declared field order; this order is the checkpoint layout
    // and the optimizer state layout
    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;
    size_t parameter_count() const;
};

struct ForwardTrace {
    std::vector<bool> is_pad;
    Vec alpha;                  // per position, zero on pads
    std::vector<Vec> tanh_act;  // per position, d_a (empty vec on pads)
    Vec pooled;                 // d
    Vec hidden_pre;             // h
    Vec hidden;                 // h
    Vec logits;                 // C
    Distribution probs;
};

struct ClassifierGradients {
    Matrix E;
    Matrix W_a;
    Vec b_a;
    Vec v_a;
    Matrix W_1;
    Vec b_1;
    Matrix W_2;
    Vec b_2;

    explicit ClassifierGradients(const ClassifierParams& p);
    std::vector<std::span<const double>> tensors() const;
    void zero();
};

ClassifierParams init_classifier(int vocab_size, int d, int d_a, int h, int C,
                                 uint64_t seed);

// Throws on out-of-range token ids or a sentence with no real tokens.
ForwardTrace classifier_forward(const ClassifierParams& params,
                                const Sentence& sentence);

// Same network but over caller-supplied embedding vectors, one per position.
// Lets tests nudge a single position's embedding even when the same token id
// appears elsewhere in the sentence.
ForwardTrace classifier_forward_embedded(const ClassifierParams& params,
                                         const std::vector<Vec>& embedded,
                                         const std::vector<bool>& is_pad);

// KL(target || p(.|sentence)) with target held constant. Computes gradients
// of weight * loss: parameter gradients accumulate into grads when given,
// per-position embedding gradients are written into input_grads when given.
// Pad positions get exact zero vectors. Returns the unweighted loss.
double classifier_backward(const ClassifierParams& params,
                           const Sentence& sentence,
                           const Distribution& target, double weight,
                           ClassifierGradients* grads,
                           std::vector<Vec>* input_grads);

// Gradient of KL(target || p) with respect to each position's embedding.
std::vector<Vec> input_gradients(const ClassifierParams& params,
                                 const Sentence& sentence,
                                 const Distribution& target);

// Backward passes executed since process start (or last reset). The
// perturbation path is contractually limited to one per sentence; tests
// watch this counter to hold it there.
uint64_t backward_pass_count();
void reset_backward_pass_count();

struct AdamState;  // vatd/optim.hpp

void classifier_train_step(ClassifierParams& params,
                           const ClassifierGradients& grads, AdamState& state,
                           double lr);

struct ClassifierCheckpoint {
    ClassifierParams params;
    std::vector<std::string> labels;
    std::string config_hash;
};

void save_classifier(const ClassifierParams& params, const std::string& path,
                     const std::vector<std::string>& labels = {},
                     const std::string& config_hash = "");
ClassifierCheckpoint load_classifier(const std::string& path);

}  // namespace vatd
